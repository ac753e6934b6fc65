//! Laplace-approximate inference on `x ~ N(0, 1)`, `y | x ~ N(2x, 1)`, `y = 1`:
//! gradient descent on the energy, the free energy along the way, and the
//! gap to a Monte-Carlo estimate of the exact free energy.

use nalgebra::DVector;
use polydyn::laplace::{
    conjugate_posterior, descend, free_energy_laplace, free_energy_mc, GaussianChannel, GaussianState, LaplaceConfig,
};
use polydyn::monad::Rng;

fn main() -> polydyn::Result<()> {
    let prior = GaussianState::scalar(0.0, 1.0)?;
    let channel = GaussianChannel::scalar(2.0, 0.0, 1.0)?;
    let y = DVector::from_vec(vec![1.0]);

    let cfg = LaplaceConfig { lambda: 0.05, ..LaplaceConfig::default() };
    let path = descend(&DVector::zeros(1), &prior, &y, &channel, &cfg)?;
    for (k, rho) in path.iter().enumerate().filter(|(k, _)| k % 20 == 0) {
        println!("step {k:3}: mean {:.8}  F_L {:.8}", rho.mean[0], free_energy_laplace(&prior, &channel, rho, &y)?);
    }
    let last = path.last().expect("at least the start");
    let (exact, log_evidence) = conjugate_posterior(&prior, &channel, &y)?;
    println!("converged after {} steps to {:.8}; exact posterior N({}, {})", path.len() - 1, last.mean[0], exact.mean[0], exact.cov[(0, 0)]);

    let mut rng = Rng::seed(99);
    let mc = free_energy_mc(&prior, &channel, last, &y, 100_000, &mut rng)?;
    let fl = free_energy_laplace(&prior, &channel, last, &y)?;
    println!("F_L = {fl:.5}, Monte Carlo F = {:.5} ± {:.5}, -log p(y) = {:.5}", mc.value, mc.std_err, -log_evidence);
    println!("the difference is half the trace of HΣ*, here 1/2");
    Ok(())
}
