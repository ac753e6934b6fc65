//! A two-level predictive stack: each level explains the one below, the
//! bottom sees the datum. The level means settle on the joint posterior.

use nalgebra::DVector;
use polydyn::laplace::{run_stack, GaussianChannel, GaussianState, LaplaceConfig};

fn main() -> polydyn::Result<()> {
    let levels = [GaussianChannel::scalar(1.5, 0.0, 0.5)?, GaussianChannel::scalar(-0.8, 0.0, 0.3)?];
    let prior = GaussianState::scalar(0.2, 2.0)?;
    let datum = DVector::from_vec(vec![1.1]);
    let cfg = LaplaceConfig { lambda: 0.05, ..LaplaceConfig::default() };
    let run = run_stack(&levels, &cfg, &prior, &datum, 3000)?;
    for (step, state) in run.iter().enumerate().filter(|(k, _)| k % 500 == 0) {
        let row: Vec<String> = state.iter().map(|l| format!("x={:.6} F={:.4}", l.x[0], l.free_energy)).collect();
        println!("step {step:4}: {}", row.join(" | "));
    }
    Ok(())
}
