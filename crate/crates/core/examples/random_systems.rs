//! Random dynamical systems over a measure-preserving base, and open bundle
//! systems, with their squares checked by enumeration.

use polydyn::cli::{catalog, suites};
use polydyn::random_bundle::{check_measure_preserving, MeasurePreservingSystem};
use polydyn::poly::Time;

fn main() -> polydyn::Result<()> {
    let shift = MeasurePreservingSystem::cyclic_shift(6)?;
    let report = check_measure_preserving(&shift, &[Time(1), Time(2)]);
    println!("cyclic shift on Z6 preserves the uniform measure: {}", report.passed);

    let rds = catalog::skew_product_example()?;
    println!("skew product over {} noise states with {} total states", rds.base().states(), rds.system().states());
    for suite in [suites::rds_suite()?, suites::bundle_suite()?] {
        for law in &suite.laws {
            println!("  {}: {} checks, passed = {}", law.law, law.checks, law.passed);
        }
    }
    Ok(())
}
