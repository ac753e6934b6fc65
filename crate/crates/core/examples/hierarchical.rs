//! Hierarchical systems: composing stochastic channels, the copy/discard
//! comonoid laws, and quasi-bisimulation under different quantifiers.

use polydyn::hier::{
    comonoid_law_systems, compose_hier, hier_trace, linear_sections, quasi_bisim, BisimOptions, HierSection, HierSystem,
    Quantifier,
};
use polydyn::monad::FiniteKernel;
use polydyn::coalg::System;
use polydyn::poly::{all_sections, Point, Polynomial, Space};

fn main() -> polydyn::Result<()> {
    let bits = Space::range(2);
    let noisy = FiniteKernel::from_matrix(bits.clone(), bits.clone(), &[vec![0.9, 0.1], vec![0.1, 0.9]])?;
    let twice = compose_hier(&HierSystem::channel(&noisy)?, &HierSystem::channel(&noisy)?)?;
    let feed_one = HierSection::input(Point::label("1"));
    let tr = hier_trace(&twice, &feed_one, twice.init().expect("channels start from their law"), 2)?;
    println!("two noisy channels in a row: {} observations per step", tr.values[0].atoms().map_or(0, |a| a.len()));

    for (law, lhs, rhs) in comonoid_law_systems(&Space::range(3))? {
        let secs = linear_sections(lhs.source(), 2)?;
        let v = quasi_bisim(&lhs, &rhs, &secs, &BisimOptions { horizon: 8, tol: 0.0, ..Default::default() })?;
        println!("{law}: related = {}", v.related);
    }

    // a 2-cycle and a 4-cycle show the same parities from matching starts,
    // but not from every pair of starts
    let cycle = |n: usize| {
        let at = |s: &Point| s.as_label().and_then(|k| k.parse::<usize>().ok()).unwrap_or(0);
        System::deterministic(
            Polynomial::linear(Space::range(2)),
            Space::range(n),
            move |s| Point::label((at(s) % 2).to_string()),
            move |s, _| Point::label(((at(s) + 1) % n).to_string()),
        )
    };
    let (two, four) = (cycle(2), cycle(4));
    let secs = all_sections(two.interface(), 16)?;
    for (alpha, beta) in [(Quantifier::Exists, Quantifier::Exists), (Quantifier::ForAll, Quantifier::Exists), (Quantifier::ForAll, Quantifier::ForAll)] {
        let v = quasi_bisim(&two, &four, &secs, &BisimOptions { alpha, beta, horizon: 6, tol: 0.0, ..Default::default() })?;
        println!("{alpha}{beta}: related = {} (deviation {})", v.related, v.deviation);
    }
    Ok(())
}
