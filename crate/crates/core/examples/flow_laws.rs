//! The flow law `step(s + t) = step(s) ∘ step(t)` on a table system, and a
//! time-dependent system that breaks it.

use polydyn::coalg::{check_flow, pairs_up_to, SystemSpec, System};
use polydyn::monad::Dist;
use polydyn::poly::{Effect, Point, Polynomial, Section, Space, Time, TimeMonoid};

fn main() -> polydyn::Result<()> {
    let spec = include_str!("../data/thermostat.json").parse::<SystemSpec>()?;
    let states = spec.system.states().enumerate()?;
    let report = check_flow(&spec.system, &spec.sections, &pairs_up_to(8), &states, 0.0);
    println!("thermostat: {} checks over {} sections, passed = {}", report.checks, spec.sections.len(), report.passed);

    // the step taken depends on the absolute time, so the law fails
    let n = |k: u64| Point::label((k % 5).to_string());
    let idx = |p: &Point| p.as_label().and_then(|s| s.parse::<u64>().ok()).unwrap_or(0);
    let drifting = System::time_indexed(
        Polynomial::y(),
        Space::range(5),
        TimeMonoid::DiscreteNat,
        Effect::Deterministic,
        |_, _| Ok(Point::Unit),
        move |t: Time, s: &Point, _: &Point| Ok(Dist::dirac(n(idx(s) + t.ticks() * t.ticks()))),
    );
    let sigma = Section::unique(&Polynomial::y())?;
    let report = check_flow(&drifting, &[sigma], &pairs_up_to(4), &Space::range(5).enumerate()?, 0.0);
    println!("time-dependent shift: passed = {}", report.passed);
    for w in report.witnesses.iter().take(3) {
        println!("  {} (deviation {})", w.context, w.deviation);
    }
    Ok(())
}
