//! Bayes' rule as a relation between two hierarchical systems: the exact
//! inversion passes, a perturbed one is caught with a witness.

use polydyn::hier::{bayes_check, exact_bayes, perturb_channel};
use polydyn::monad::{Dist, FiniteKernel};
use polydyn::poly::{Point, Space};

fn main() -> polydyn::Result<()> {
    let (xs, ys) = (Space::finite(["rain", "dry"])?, Space::finite(["wet", "not_wet"])?);
    let sensor = FiniteKernel::from_matrix(xs, ys, &[vec![0.8, 0.2], vec![0.3, 0.7]])?;
    let prior = Dist::categorical([(Point::label("rain"), 0.5), (Point::label("dry"), 0.5)])?;

    let inv = exact_bayes(&sensor, &prior)?;
    for (y, row) in inv.kernel.rows() {
        println!("P(rain | {y}) = {:.4}", row.weight(&Point::label("rain")));
    }
    let ok = bayes_check(&sensor, &prior, &inv.kernel, 3, 1e-9)?;
    println!("exact inversion: related = {} (deviation {:e})", ok.related, ok.deviation);

    let off = perturb_channel(&inv.kernel, 0.05)?;
    let bad = bayes_check(&sensor, &prior, &off, 3, 1e-9)?;
    println!("perturbed by 0.05: related = {} (deviation {:.4})", bad.related, bad.deviation);
    if let Some(w) = bad.report.witnesses.first() {
        println!("  witness: {}", w.context);
    }
    Ok(())
}
