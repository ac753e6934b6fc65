//! The Laplace energy `E(x, y) = −log p_γ(y|x) − log p_π(x)` and the
//! quantities built from it.

use std::f64::consts::{E, PI};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::monad::Rng;

use super::channel::{spd_inverse, GaussianChannel, GaussianState};

/// Step for central differences of the energy and its gradient.
pub const FD_STEP: f64 = 1e-5;

/// Residuals and precision-weighted residuals at `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTerms {
    /// `ε_γ = y − μ_γ(x)`.
    pub eps_gamma: DVector<f64>,
    /// `ε_π = x − μ_π`.
    pub eps_pi: DVector<f64>,
    /// `η_γ = Σ_γ(x)⁻¹ ε_γ`.
    pub eta_gamma: DVector<f64>,
    /// `η_π = Σ_π⁻¹ ε_π`.
    pub eta_pi: DVector<f64>,
}

fn check_dims(pi: &GaussianState, gamma: &GaussianChannel, x: &DVector<f64>, y: &DVector<f64>) -> Result<()> {
    if pi.dim() != gamma.in_dim() || x.len() != gamma.in_dim() || y.len() != gamma.out_dim() {
        return Err(Error::Shape(format!(
            "prior on ℝ^{}, x in ℝ^{}, y in ℝ^{} for a channel ℝ^{} → ℝ^{}",
            pi.dim(),
            x.len(),
            y.len(),
            gamma.in_dim(),
            gamma.out_dim()
        )));
    }
    Ok(())
}

pub fn energy_terms(pi: &GaussianState, gamma: &GaussianChannel, x: &DVector<f64>, y: &DVector<f64>) -> Result<EnergyTerms> {
    check_dims(pi, gamma, x, y)?;
    let eps_gamma = y - gamma.mean(x)?;
    let eps_pi = x - &pi.mean;
    let eta_gamma = spd_inverse(&gamma.cov(x)?, "channel covariance")? * &eps_gamma;
    let eta_pi = spd_inverse(&pi.cov, "prior covariance")? * &eps_pi;
    Ok(EnergyTerms { eps_gamma, eps_pi, eta_gamma, eta_pi })
}

/// `log N(v; mean, cov) = −½⟨ε, Σ⁻¹ε⟩ − log √((2π)ⁿ det Σ)`.
pub fn log_gaussian_density(v: &DVector<f64>, mean: &DVector<f64>, cov: &DMatrix<f64>) -> Result<f64> {
    let n = v.len() as f64;
    let inv = spd_inverse(cov, "covariance")?;
    let eps = v - mean;
    Ok(-0.5 * eps.dot(&(inv * &eps)) - 0.5 * (n * (2.0 * PI).ln() + cov.determinant().ln()))
}

/// `E_{(π,γ)}(x, y)`.
pub fn energy(pi: &GaussianState, gamma: &GaussianChannel, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    check_dims(pi, gamma, x, y)?;
    let lik = log_gaussian_density(y, &gamma.mean(x)?, &gamma.cov(x)?)?;
    let prior = log_gaussian_density(x, &pi.mean, &pi.cov)?;
    Ok(-lik - prior)
}

/// `∂ₓE = −∂ₓμ_γ(x)ᵀ η_γ + η_π`, holding `Σ_γ` fixed.
pub fn grad_energy(pi: &GaussianState, gamma: &GaussianChannel, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let t = energy_terms(pi, gamma, x, y)?;
    Ok(-gamma.jacobian(x)?.transpose() * t.eta_gamma + t.eta_pi)
}

/// Central differences of [`energy`].
pub fn grad_energy_fd(pi: &GaussianState, gamma: &GaussianChannel, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let mut g = DVector::zeros(x.len());
    for i in 0..x.len() {
        let h = FD_STEP * x[i].abs().max(1.0);
        let (mut up, mut down) = (x.clone(), x.clone());
        up[i] += h;
        down[i] -= h;
        g[i] = (energy(pi, gamma, &up, y)? - energy(pi, gamma, &down, y)?) / (2.0 * h);
    }
    Ok(g)
}

/// `∂²ₓE` at `x`: the Gauss–Newton form `JᵀΣ_γ⁻¹J + Σ_π⁻¹` for affine
/// means, central differences of the gradient otherwise.
pub fn hessian_energy(pi: &GaussianState, gamma: &GaussianChannel, x: &DVector<f64>, y: &DVector<f64>) -> Result<DMatrix<f64>> {
    check_dims(pi, gamma, x, y)?;
    let prior_prec = spd_inverse(&pi.cov, "prior covariance")?;
    if gamma.is_linear() {
        let j = gamma.jacobian(x)?;
        return Ok(j.transpose() * spd_inverse(&gamma.cov(x)?, "channel covariance")? * j + prior_prec);
    }
    let n = x.len();
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        let step = FD_STEP * x[i].abs().max(1.0);
        let (mut up, mut down) = (x.clone(), x.clone());
        up[i] += step;
        down[i] -= step;
        let col = (grad_energy(pi, gamma, &up, y)? - grad_energy(pi, gamma, &down, y)?) / (2.0 * step);
        h.set_column(i, &col);
    }
    Ok((&h + h.transpose()) * 0.5)
}

/// `Σ* = (∂²ₓE)(μ_ρ, y)⁻¹`.
pub fn sigma_star(pi: &GaussianState, gamma: &GaussianChannel, mu_rho: &DVector<f64>, y: &DVector<f64>) -> Result<DMatrix<f64>> {
    spd_inverse(&hessian_energy(pi, gamma, mu_rho, y)?, "energy Hessian")
}

/// `S[ρ] = ½ log det(2πe Σ)`.
pub fn gaussian_entropy(state: &GaussianState) -> Result<f64> {
    let n = state.dim() as f64;
    let det = state.cov.determinant();
    if !(det > 0.0) {
        let lo = state.cov.clone().symmetric_eigen().eigenvalues.amin();
        return Err(Error::Singular { context: "entropy covariance".into(), condition: state.cov.amax() / lo });
    }
    Ok(0.5 * (n * (2.0 * PI * E).ln() + det.ln()))
}

/// `ℱᴸ(y) = E(μ_ρ, y) − S[ρ]`.
pub fn free_energy_laplace(pi: &GaussianState, gamma: &GaussianChannel, rho: &GaussianState, y: &DVector<f64>) -> Result<f64> {
    Ok(energy(pi, gamma, &rho.mean, y)? - gaussian_entropy(rho)?)
}

/// `½ tr(∂²ₓE(μ_ρ) Σ_ρ)`: the second-order term of the expected energy.
pub fn laplace_trace_term(pi: &GaussianState, gamma: &GaussianChannel, rho: &GaussianState, y: &DVector<f64>) -> Result<f64> {
    Ok(0.5 * (hessian_energy(pi, gamma, &rho.mean, y)? * &rho.cov).trace())
}

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

/// `ℱ(y) = 𝔼_{x∼ρ}[E(x, y)] − S[ρ]` from `n` draws.
pub fn free_energy_mc(
    pi: &GaussianState,
    gamma: &GaussianChannel,
    rho: &GaussianState,
    y: &DVector<f64>,
    n: usize,
    rng: &mut Rng,
) -> Result<Estimate> {
    if n < 2 {
        return Err(Error::Invalid("a Monte-Carlo estimate needs at least two draws".into()));
    }
    let root = rho.cov.clone().cholesky().map(|c| c.l()).unwrap_or_else(|| {
        let eig = rho.cov.clone().symmetric_eigen();
        &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()))
    });
    let (mut sum, mut sq) = (0.0, 0.0);
    let mut z = DVector::zeros(rho.dim());
    for _ in 0..n {
        z.iter_mut().for_each(|v| *v = rng.normal());
        let e = energy(pi, gamma, &(&rho.mean + &root * &z), y)?;
        sum += e;
        sq += e * e;
    }
    let mean = sum / n as f64;
    let var = (sq / n as f64 - mean * mean).max(0.0) * n as f64 / (n - 1) as f64;
    Ok(Estimate { value: mean - gaussian_entropy(rho)?, std_err: (var / n as f64).sqrt() })
}

/// The exact posterior `γ†_π(y)` and `log p(y)` for an affine channel.
pub fn conjugate_posterior(pi: &GaussianState, gamma: &GaussianChannel, y: &DVector<f64>) -> Result<(GaussianState, f64)> {
    if !gamma.is_linear() {
        return Err(Error::Unsupported("conjugate posterior of a nonlinear channel".into()));
    }
    let x0 = DVector::zeros(gamma.in_dim());
    check_dims(pi, gamma, &x0, y)?;
    let a = gamma.jacobian(&x0)?;
    let b = gamma.mean(&x0)?;
    let noise = gamma.cov(&x0)?;
    let noise_prec = spd_inverse(&noise, "channel covariance")?;
    let prior_prec = spd_inverse(&pi.cov, "prior covariance")?;
    let cov = spd_inverse(&(a.transpose() * &noise_prec * &a + &prior_prec), "posterior precision")?;
    let mean = &cov * (a.transpose() * &noise_prec * (y - &b) + &prior_prec * &pi.mean);
    let marginal = &a * &pi.cov * a.transpose() + noise;
    let evidence = log_gaussian_density(y, &(&a * &pi.mean + b), &marginal)?;
    Ok((GaussianState::new(mean, (&cov + cov.transpose()) * 0.5)?, evidence))
}

/// `D_KL(p ‖ q)` between Gaussians.
pub fn gaussian_kl(p: &GaussianState, q: &GaussianState) -> Result<f64> {
    let n = p.dim() as f64;
    let q_prec = spd_inverse(&q.cov, "covariance")?;
    let d = &q.mean - &p.mean;
    Ok(0.5 * ((&q_prec * &p.cov).trace() + d.dot(&(&q_prec * &d)) - n + (q.cov.determinant() / p.cov.determinant()).ln()))
}
