//! The ρ^u update, the one-level Laplace system and predictive stacks.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hier::{belief_space, hibi_compose, run_states, HierSection, HierSystem, TraceMode};
use crate::monad::{dst, Dist};
use crate::poly::{Point, PolyMap, Polynomial, Space, TimeMonoid};

use super::channel::{GaussianChannel, GaussianState};
use super::energy::{free_energy_laplace, grad_energy, sigma_star};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LaplaceConfig {
    /// Learning rate `λ`; zero freezes the means.
    pub lambda: f64,
    pub iterations: usize,
    /// Stop descending once a step moves the mean by at most this much.
    pub tolerance: f64,
    /// Covariance added to the belief input, which makes point-valued
    /// predictions from a level above usable as priors.
    #[serde(skip)]
    pub prior_noise: Option<DMatrix<f64>>,
    /// On a continuous clock with step `h` the rate is `λ·h`.
    pub time: TimeMonoid,
}

impl Default for LaplaceConfig {
    fn default() -> Self {
        LaplaceConfig {
            lambda: 0.05,
            iterations: 10_000,
            tolerance: 1e-12,
            prior_noise: None,
            time: TimeMonoid::DiscreteNat,
        }
    }
}

impl LaplaceConfig {
    pub fn validate(&self) -> Result<()> {
        // λ = 0 is allowed and freezes the means
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::Invalid(format!("learning rate must be non-negative, got {}", self.lambda)));
        }
        Ok(())
    }

    /// The step actually taken per tick.
    pub fn rate(&self) -> f64 {
        match self.time {
            TimeMonoid::DiscreteNat => self.lambda,
            TimeMonoid::RealNonNeg { h } => self.lambda * h,
        }
    }
}

/// `ρ^u(x, π, y) = (x − λ ∂ₓE(x, y), Σ*)`, with `Σ*` taken at the new mean.
pub fn rho_update(x: &DVector<f64>, pi: &GaussianState, y: &DVector<f64>, gamma: &GaussianChannel, cfg: &LaplaceConfig) -> Result<GaussianState> {
    let mean = x - cfg.rate() * grad_energy(pi, gamma, x, y)?;
    let cov = sigma_star(pi, gamma, &mean, y)?;
    GaussianState::new(mean, (&cov + cov.transpose()) * 0.5)
}

/// Iterates [`rho_update`] from `x0`; returns every belief visited, the
/// first with `Σ*` at `x0`.
pub fn descend(x0: &DVector<f64>, pi: &GaussianState, y: &DVector<f64>, gamma: &GaussianChannel, cfg: &LaplaceConfig) -> Result<Vec<GaussianState>> {
    cfg.validate()?;
    let mut path = vec![GaussianState::new(x0.clone(), sigma_star(pi, gamma, x0, y)?)?];
    for _ in 0..cfg.iterations {
        let last = path.last().expect("non-empty");
        let next = rho_update(&last.mean, pi, y, gamma, cfg)?;
        let moved = (&next.mean - &last.mean).amax();
        path.push(next);
        if moved <= cfg.tolerance {
            break;
        }
    }
    Ok(path)
}

fn vector_of(p: &Point) -> Result<DVector<f64>> {
    p.as_vector()
        .map(DVector::from_column_slice)
        .ok_or_else(|| Error::IllTyped(format!("{p} is not a point of ℝⁿ")))
}

/// The belief input, widened by the configured prior noise.
fn prior_of(belief: &Point, cfg: &LaplaceConfig) -> Result<GaussianState> {
    let (mean, mut cov) = crate::hier::belief_from_point(belief)?;
    if let Some(noise) = &cfg.prior_noise {
        if noise.shape() != cov.shape() {
            return Err(Error::Shape(format!("prior noise {}x{} for a belief over ℝ^{}", noise.nrows(), noise.ncols(), mean.len())));
        }
        cov += noise;
    }
    GaussianState::new(mean, cov)
}

/// The Laplace system `𝒫ℝⁿ y^{ℝⁿ} → ℝᵐ y^{ℝᵐ}` of `γ : ℝⁿ → 𝒫ℝᵐ`.
///
/// The state is `(x, y)`. It emits `y` forward and passes `x` back; on a
/// belief `π` and datum `y′` it moves to `ρ = ρ^u(x, π, y′)` and predicts
/// `γ^←(ρ)`, the two drawn independently. It starts at `(0, μ_γ(0))`.
pub fn build_laplace(gamma: &GaussianChannel, cfg: &LaplaceConfig) -> Result<HierSystem> {
    cfg.validate()?;
    let (n, m) = (gamma.in_dim(), gamma.out_dim());
    let p = Polynomial::monomial(belief_space(n), Space::euclid(n));
    let q = Polynomial::monomial(Space::euclid(m), Space::euclid(m));
    let (g, cfg) = (gamma.clone(), cfg.clone());
    let init = Point::pair(Point::vector(vec![0.0; n]), Point::vector(gamma.mean(&DVector::zeros(n))?.as_slice().to_vec()));
    let (p1, q1) = (p.clone(), q.clone());
    HierSystem::new(
        p,
        q,
        Space::pair(Space::euclid(n), Space::euclid(m)),
        move |xy| {
            let (x, y) = (xy.component(0)?.clone(), xy.component(1)?.clone());
            Ok(PolyMap::lens(p1.clone(), q1.clone(), move |_| y.clone(), move |_, _| x.clone()))
        },
        move |xy, belief, datum| {
            let x = vector_of(xy.component(0)?)?;
            let prior = prior_of(belief, &cfg)?;
            let rho = rho_update(&x, &prior, &vector_of(datum)?, &g, &cfg)?;
            let prediction = g.predict(&rho)?;
            dst(&rho.to_dist()?, &prediction.to_dist()?)
        },
    )
    .with_init(Dist::Dirac(init))
}

/// Composes one Laplace level per channel, top first. Level `k + 1` takes
/// the prediction of level `k` as its prior mean, widened by the constant
/// covariance of channel `k`.
pub fn stack(levels: &[GaussianChannel], cfg: &LaplaceConfig) -> Result<HierSystem> {
    let systems = stack_levels(levels, cfg)?;
    let (first, rest) = systems.split_first().expect("checked non-empty");
    rest.iter().try_fold(first.clone(), |acc, next| hibi_compose(&acc, next))
}

/// The individual levels of [`stack`], before composition.
pub fn stack_levels(levels: &[GaussianChannel], cfg: &LaplaceConfig) -> Result<Vec<HierSystem>> {
    if levels.is_empty() {
        return Err(Error::Invalid("a stack needs at least one level".into()));
    }
    let mut out = vec![build_laplace(&levels[0], cfg)?];
    for pair in levels.windows(2) {
        let (above, below) = (&pair[0], &pair[1]);
        if above.out_dim() != below.in_dim() {
            return Err(Error::Shape(format!(
                "level predicting ℝ^{} above a level on ℝ^{}",
                above.out_dim(),
                below.in_dim()
            )));
        }
        let noise = above
            .constant_cov()
            .ok_or_else(|| Error::Unsupported("stacking below a channel with varying covariance".into()))?;
        let level_cfg = LaplaceConfig { prior_noise: Some(noise.clone()), ..cfg.clone() };
        out.push(build_laplace(below, &level_cfg)?);
    }
    Ok(out)
}

/// The section feeding a fixed top-level belief and a clamped datum.
pub fn clamp(prior: &GaussianState, datum: &DVector<f64>) -> HierSection {
    HierSection::constant(prior.to_point(), Point::vector(datum.as_slice().to_vec()))
}

/// Splits a left-nested composite state `((s₀, s₁), …, sₖ)` into levels.
pub fn level_states(state: &Point, levels: usize) -> Result<Vec<Point>> {
    let mut out = Vec::with_capacity(levels);
    let mut cur = state.clone();
    for _ in 1..levels {
        out.push(cur.component(1)?.clone());
        cur = cur.component(0)?.clone();
    }
    out.push(cur);
    out.reverse();
    Ok(out)
}

/// One level at one step of a stack run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub free_energy: f64,
}

/// Runs the stack on the mean skeleton for `steps` ticks with the top belief
/// `prior` and datum `datum` clamped. Level free energies use each level's
/// current prior and datum.
pub fn run_stack(
    levels: &[GaussianChannel],
    cfg: &LaplaceConfig,
    prior: &GaussianState,
    datum: &DVector<f64>,
    steps: u64,
) -> Result<Vec<Vec<LevelState>>> {
    let sys = stack(levels, cfg)?;
    let laws = run_states(&sys, &clamp(prior, datum), sys.init().expect("levels start from a point"), steps, TraceMode::MeanSkeleton)?;
    laws.iter()
        .map(|law| {
            let state = law.as_dirac().expect("skeleton laws are points");
            let parts = level_states(state, levels.len())?;
            let xs = parts.iter().map(|s| vector_of(s.component(0)?)).collect::<Result<Vec<_>>>()?;
            let ys = parts.iter().map(|s| vector_of(s.component(1)?)).collect::<Result<Vec<_>>>()?;
            (0..levels.len())
                .map(|k| {
                    let level_prior = if k == 0 {
                        prior.clone()
                    } else {
                        GaussianState::new(ys[k - 1].clone(), levels[k - 1].constant_cov().expect("checked by stack").clone())?
                    };
                    let level_datum = if k + 1 == levels.len() { datum.clone() } else { xs[k + 1].clone() };
                    let cov = sigma_star(&level_prior, &levels[k], &xs[k], &level_datum)?;
                    let rho = GaussianState::new(xs[k].clone(), (&cov + cov.transpose()) * 0.5)?;
                    Ok(LevelState {
                        x: xs[k].as_slice().to_vec(),
                        y: ys[k].as_slice().to_vec(),
                        free_energy: free_energy_laplace(&level_prior, &levels[k], &rho, &level_datum)?,
                    })
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hier::{hier_trace_mode, TraceMode};

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn model() -> (GaussianState, GaussianChannel) {
        (GaussianState::scalar(0.0, 1.0).unwrap(), GaussianChannel::scalar(2.0, 0.0, 1.0).unwrap())
    }

    #[test]
    fn fixed_point_and_zero_rate() {
        let (pi, g) = model();
        let cfg = LaplaceConfig::default();
        let s = rho_update(&v(&[0.4]), &pi, &v(&[1.0]), &g, &cfg).unwrap();
        assert!((s.mean[0] - 0.4).abs() < 1e-15 && (s.cov[(0, 0)] - 0.2).abs() < 1e-12);
        let frozen = LaplaceConfig { lambda: 0.0, ..cfg };
        let s = rho_update(&v(&[1.3]), &pi, &v(&[1.0]), &g, &frozen).unwrap();
        assert_eq!(s.mean[0], 1.3);
        assert!((s.cov[(0, 0)] - 0.2).abs() < 1e-12);
        assert!(LaplaceConfig { lambda: -0.1, ..LaplaceConfig::default() }.validate().is_err());
    }

    #[test]
    fn descent_converges_and_free_energy_decreases() {
        let (pi, g) = model();
        let path = descend(&v(&[0.0]), &pi, &v(&[1.0]), &g, &LaplaceConfig::default()).unwrap();
        assert!(path.len() <= 10_001);
        assert!((path.last().unwrap().mean[0] - 0.4).abs() <= 1e-6);
        let f: Vec<f64> = path.iter().map(|r| free_energy_laplace(&pi, &g, r, &v(&[1.0])).unwrap()).collect();
        assert!(f.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn outputs_are_projections() {
        let (_, g) = model();
        let sys = build_laplace(&g, &LaplaceConfig::default()).unwrap();
        let s = Point::pair(Point::vector(vec![0.7]), Point::vector(vec![-1.5]));
        let f = sys.emit(&s).unwrap();
        let b = GaussianState::scalar(0.0, 1.0).unwrap().to_point();
        assert_eq!(f.forward(&b).unwrap(), Point::vector(vec![-1.5]));
        assert_eq!(f.backward_point(&b, &Point::vector(vec![9.0])).unwrap(), Point::vector(vec![0.7]));
    }

    #[test]
    fn one_level_converges_in_mean() {
        let (pi, g) = model();
        let sys = build_laplace(&g, &LaplaceConfig::default()).unwrap();
        let laws = run_states(&sys, &clamp(&pi, &v(&[1.0])), sys.init().unwrap(), 400, TraceMode::MeanSkeleton).unwrap();
        let last = laws.last().unwrap().as_dirac().unwrap().clone();
        assert!((last.component(0).unwrap().as_vector().unwrap()[0] - 0.4).abs() < 1e-9);
        assert!((last.component(1).unwrap().as_vector().unwrap()[0] - 0.8).abs() < 1e-9);
        // the exact state law after one step is the independent product
        let one = crate::hier::HierSystem::absorb(&sys, sys.init().unwrap().as_dirac().unwrap(), &pi.to_point(), &Point::vector(vec![1.0])).unwrap();
        let joint = one.as_gaussian().unwrap();
        assert_eq!(joint.cov()[(0, 1)], 0.0);
    }

    #[test]
    fn single_level_stack_is_the_level() {
        let (pi, g) = model();
        let cfg = LaplaceConfig::default();
        let a = stack(std::slice::from_ref(&g), &cfg).unwrap();
        let b = build_laplace(&g, &cfg).unwrap();
        let sec = clamp(&pi, &v(&[1.0]));
        let ta = hier_trace_mode(&a, &sec, a.init().unwrap(), 20, TraceMode::MeanSkeleton).unwrap();
        let tb = hier_trace_mode(&b, &sec, b.init().unwrap(), 20, TraceMode::MeanSkeleton).unwrap();
        assert_eq!(ta, tb);
    }

    #[test]
    fn two_levels_reach_the_joint_posterior() {
        let (a1, s1, a2, s2, m0, s0, z) = (1.5, 0.5, -0.8, 0.3, 0.2, 2.0, 1.1);
        let levels = [GaussianChannel::scalar(a1, 0.0, s1).unwrap(), GaussianChannel::scalar(a2, 0.0, s2).unwrap()];
        let prior = GaussianState::scalar(m0, s0).unwrap();
        let run = run_stack(&levels, &LaplaceConfig::default(), &prior, &v(&[z]), 5000).unwrap();
        let p = DMatrix::from_row_slice(2, 2, &[1.0 / s0 + a1 * a1 / s1, -a1 / s1, -a1 / s1, 1.0 / s1 + a2 * a2 / s2]);
        let post = p.lu().solve(&v(&[m0 / s0, a2 * z / s2])).unwrap();
        let last = run.last().unwrap();
        assert!((last[0].x[0] - post[0]).abs() < 1e-4, "{} vs {}", last[0].x[0], post[0]);
        assert!((last[1].x[0] - post[1]).abs() < 1e-4, "{} vs {}", last[1].x[0], post[1]);
    }

    #[test]
    fn mismatched_levels_are_rejected() {
        let g1 = GaussianChannel::linear(DMatrix::identity(2, 1), v(&[0.0, 0.0]), DMatrix::identity(2, 2)).unwrap();
        let g2 = GaussianChannel::scalar(1.0, 0.0, 1.0).unwrap();
        assert!(matches!(stack(&[g1, g2], &LaplaceConfig::default()), Err(Error::Shape(_))));
    }
}
