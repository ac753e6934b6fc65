//! A two-state stochastic cell: exact laws against powers of its matrix, and
//! a Monte-Carlo trace from seeded sampling.

use polydyn::coalg::{trace, trace_sampled, SystemSpec};
use polydyn::monad::{Dist, Rng};
use polydyn::poly::{Point, Time};

fn main() -> polydyn::Result<()> {
    let spec = include_str!("../data/markov.json").parse::<SystemSpec>()?;
    let cl = spec.system.closure(&spec.sections[0])?;
    for s in ["0", "1"] {
        let row = cl.step(Time(2), &Point::label(s))?;
        println!("two steps from {s}: P(0) = {:.4}, P(1) = {:.4}", row.weight(&Point::label("0")), row.weight(&Point::label("1")));
    }

    let start = Dist::dirac(Point::label("0"));
    let exact = trace(&spec.system, &spec.sections[0], &start, 20)?;
    let mut rng = Rng::seed(2024);
    let sampled = trace_sampled(&spec.system, &spec.sections[0], &start, 20, 20_000, &mut rng)?;
    let (gap, at) = exact.distance(&sampled);
    println!("exact vs 20000 sampled paths: worst total variation {gap:.4} at t = {}", at.map_or(0, |t| t.ticks()));
    // the stationary law of K is (2/3, 1/3)
    println!("P(0) at t = 20: {:.6}", exact.values[20].weight(&Point::label("0")));
    Ok(())
}
