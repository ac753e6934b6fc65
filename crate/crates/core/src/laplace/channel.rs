//! Gaussian channels `γ : ℝⁿ → 𝒫ℝᵐ` and Gaussian beliefs.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hier::{belief_from_point, belief_point};
use crate::monad::{Affine, AffineGaussian, Dist, Gaussian, Kernel, PSD_TOL};
use crate::poly::{Point, Space};

/// Step for central differences of channel means.
pub const JACOBIAN_STEP: f64 = 1e-6;

type VecFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;
type MatFn = dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync;

/// Inverts a symmetric positive-definite matrix, reporting its condition
/// number when that fails.
pub(crate) fn spd_inverse(m: &DMatrix<f64>, context: &str) -> Result<DMatrix<f64>> {
    let condition = || {
        let eig = m.clone().symmetric_eigen().eigenvalues;
        let (lo, hi) = (eig.amin(), eig.amax());
        if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    };
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Singular { context: context.into(), condition: condition() })?;
    let inv = chol.inverse();
    if inv.iter().any(|v| !v.is_finite()) || condition() > 1e14 {
        return Err(Error::Singular { context: context.into(), condition: condition() });
    }
    Ok(inv)
}

#[derive(Clone)]
pub enum Covariance {
    Constant(DMatrix<f64>),
    Varying(Arc<MatFn>),
}

/// `x ↦ N(μ_γ(x), Σ_γ(x))`, with the Jacobian `∂ₓμ_γ`.
#[derive(Clone)]
pub struct GaussianChannel {
    in_dim: usize,
    out_dim: usize,
    mean: Arc<VecFn>,
    jacobian: Option<Arc<MatFn>>,
    cov: Covariance,
    /// `Some` when the mean is affine.
    affine: Option<Affine>,
    name: String,
}

impl fmt::Debug for GaussianChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GaussianChannel({}: ℝ^{} → 𝒫ℝ^{})", self.name, self.in_dim, self.out_dim)
    }
}

fn check_cov(cov: &DMatrix<f64>, dim: usize) -> Result<()> {
    Gaussian::new(Space::euclid(dim), DVector::zeros(dim), cov.clone()).map(|_| ())
}

impl GaussianChannel {
    /// `x ↦ N(A x + b, Σ)`.
    pub fn linear(a: DMatrix<f64>, b: DVector<f64>, cov: DMatrix<f64>) -> Result<GaussianChannel> {
        let (m, n) = a.shape();
        if b.len() != m {
            return Err(Error::Shape(format!("offset of length {} for a {m}x{n} map", b.len())));
        }
        check_cov(&cov, m)?;
        let affine = Affine::new(Space::euclid(n), Space::euclid(m), a.clone(), b.clone())?;
        let (a1, a2) = (a.clone(), a);
        Ok(GaussianChannel {
            in_dim: n,
            out_dim: m,
            mean: Arc::new(move |x| &a1 * x + &b),
            jacobian: Some(Arc::new(move |_| a2.clone())),
            cov: Covariance::Constant(cov),
            affine: Some(affine),
            name: "linear".into(),
        })
    }

    /// Scalar `x ↦ N(a x + b, var)`.
    pub fn scalar(a: f64, b: f64, var: f64) -> Result<GaussianChannel> {
        GaussianChannel::linear(
            DMatrix::from_element(1, 1, a),
            DVector::from_element(1, b),
            DMatrix::from_element(1, 1, var),
        )
    }

    /// A channel with a general mean and constant covariance. Without a
    /// Jacobian, central differences are used.
    pub fn new<F>(name: impl Into<String>, in_dim: usize, out_dim: usize, mean: F, cov: DMatrix<f64>) -> Result<GaussianChannel>
    where
        F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        check_cov(&cov, out_dim)?;
        Ok(GaussianChannel {
            in_dim,
            out_dim,
            mean: Arc::new(mean),
            jacobian: None,
            cov: Covariance::Constant(cov),
            affine: None,
            name: name.into(),
        })
    }

    pub fn with_jacobian<J>(mut self, jacobian: J) -> GaussianChannel
    where
        J: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    /// Replaces the covariance by a state-dependent one.
    pub fn with_varying_cov<C>(mut self, cov: C) -> GaussianChannel
    where
        C: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.cov = Covariance::Varying(Arc::new(cov));
        self
    }

    /// `x ↦ N(A tanh(x) + b, Σ)`.
    pub fn tanh(a: DMatrix<f64>, b: DVector<f64>, cov: DMatrix<f64>) -> Result<GaussianChannel> {
        let (m, n) = a.shape();
        if b.len() != m {
            return Err(Error::Shape(format!("offset of length {} for a {m}x{n} map", b.len())));
        }
        let a2 = a.clone();
        Ok(GaussianChannel::new("tanh", n, m, move |x| &a * x.map(f64::tanh) + &b, cov)?.with_jacobian(move |x| {
            let mut j = a2.clone();
            for (c, xc) in x.iter().enumerate() {
                let d = 1.0 - xc.tanh().powi(2);
                j.column_mut(c).scale_mut(d);
            }
            j
        }))
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_linear(&self) -> bool {
        self.affine.is_some()
    }

    fn check_input(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.in_dim {
            return Err(Error::Shape(format!("input of length {} for a channel on ℝ^{}", x.len(), self.in_dim)));
        }
        Ok(())
    }

    /// `μ_γ(x)`.
    pub fn mean(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_input(x)?;
        let m = (self.mean)(x);
        if m.len() != self.out_dim {
            return Err(Error::Shape(format!("mean of length {} from a channel into ℝ^{}", m.len(), self.out_dim)));
        }
        Ok(m)
    }

    /// `∂ₓμ_γ(x)`, analytic when supplied.
    pub fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_input(x)?;
        match &self.jacobian {
            Some(j) => Ok(j(x)),
            None => self.jacobian_fd(x),
        }
    }

    /// Central-difference Jacobian.
    pub fn jacobian_fd(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let mut j = DMatrix::zeros(self.out_dim, self.in_dim);
        for c in 0..self.in_dim {
            let h = JACOBIAN_STEP * x[c].abs().max(1.0);
            let (mut up, mut down) = (x.clone(), x.clone());
            up[c] += h;
            down[c] -= h;
            j.set_column(c, &((self.mean(&up)? - self.mean(&down)?) / (2.0 * h)));
        }
        Ok(j)
    }

    /// `Σ_γ(x)`.
    pub fn cov(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_input(x)?;
        match &self.cov {
            Covariance::Constant(c) => Ok(c.clone()),
            Covariance::Varying(f) => {
                let c = f(x);
                check_cov(&c, self.out_dim)?;
                Ok(c)
            }
        }
    }

    pub fn constant_cov(&self) -> Option<&DMatrix<f64>> {
        match &self.cov {
            Covariance::Constant(c) => Some(c),
            Covariance::Varying(_) => None,
        }
    }

    /// `γ(x)` as a law over `ℝᵐ`.
    pub fn at(&self, x: &DVector<f64>) -> Result<GaussianState> {
        GaussianState::new(self.mean(x)?, self.cov(x)?)
    }

    /// `γ^←(ρ)`: the predicted law of `y` under a Gaussian belief about `x`.
    /// Exact for affine means; otherwise the mean is linearized at `μ_ρ`.
    pub fn predict(&self, rho: &GaussianState) -> Result<GaussianState> {
        let j = self.jacobian(&rho.mean)?;
        let mean = self.mean(&rho.mean)?;
        let cov = &j * &rho.cov * j.transpose() + self.cov(&rho.mean)?;
        GaussianState::new(mean, (&cov + cov.transpose()) * 0.5)
    }

    /// The channel as a Markov kernel `ℝⁿ → 𝒫ℝᵐ`.
    pub fn kernel(&self) -> Result<Kernel> {
        match (&self.affine, &self.cov) {
            (Some(a), Covariance::Constant(c)) => Ok(Kernel::Affine(AffineGaussian::new(a.clone(), c.clone())?)),
            _ => {
                let me = self.clone();
                Ok(Kernel::new(move |p| {
                    let x = DVector::from_column_slice(
                        p.as_vector().ok_or_else(|| Error::IllTyped(format!("{p} is not a point of ℝⁿ")))?,
                    );
                    me.at(&x)?.to_dist()
                }))
            }
        }
    }
}

/// A Gaussian belief `N(mean, cov)` over `ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianState {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<GaussianState> {
        let n = mean.len();
        if cov.shape() != (n, n) {
            return Err(Error::Shape(format!("{}x{} covariance for a mean of length {n}", cov.nrows(), cov.ncols())));
        }
        if n > 0 {
            let scale = cov.amax().max(1.0);
            if (&cov - cov.transpose()).amax() > 1e-9 * scale {
                return Err(Error::Invalid("covariance is not symmetric".into()));
            }
            let lo = cov.clone().symmetric_eigen().eigenvalues.min();
            if lo < PSD_TOL * scale {
                return Err(Error::Invalid(format!("covariance is not PSD (smallest eigenvalue {lo:e})")));
            }
        }
        Ok(GaussianState { mean, cov })
    }

    pub fn scalar(mean: f64, var: f64) -> Result<GaussianState> {
        GaussianState::new(DVector::from_element(1, mean), DMatrix::from_element(1, 1, var))
    }

    /// A point mass, as a belief with zero covariance.
    pub fn point(mean: DVector<f64>) -> GaussianState {
        let n = mean.len();
        GaussianState { mean, cov: DMatrix::zeros(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn to_dist(&self) -> Result<Dist> {
        Dist::gaussian(Space::euclid(self.dim()), self.mean.clone(), self.cov.clone())
    }

    pub fn to_point(&self) -> Point {
        belief_point(&self.mean, &self.cov)
    }

    pub fn from_point(p: &Point) -> Result<GaussianState> {
        let (mean, cov) = belief_from_point(p)?;
        GaussianState::new(mean, cov)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tanh_jacobian_matches_differences() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, -0.5, 2.0, 0.3, 0.7, -1.2]);
        let g = GaussianChannel::tanh(a, DVector::from_vec(vec![0.1, -0.2]), DMatrix::identity(2, 2)).unwrap();
        for x in [[0.0, 0.0, 0.0], [0.3, -1.0, 2.0], [1.5, 0.2, -0.7]] {
            let x = DVector::from_column_slice(&x);
            let (j, fd) = (g.jacobian(&x).unwrap(), g.jacobian_fd(&x).unwrap());
            assert!((&j - &fd).amax() <= 1e-5 * j.amax().max(1.0));
        }
    }

    #[test]
    fn linear_prediction_is_exact() {
        let g = GaussianChannel::scalar(2.0, 1.0, 0.5).unwrap();
        let rho = GaussianState::scalar(3.0, 0.25).unwrap();
        let p = g.predict(&rho).unwrap();
        assert_eq!(p.mean[0], 7.0);
        assert!((p.cov[(0, 0)] - (4.0 * 0.25 + 0.5)).abs() < 1e-15);
        let k = g.kernel().unwrap().extend(&rho.to_dist().unwrap()).unwrap();
        let kg = k.as_gaussian().unwrap();
        assert!((kg.cov()[(0, 0)] - p.cov[(0, 0)]).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(GaussianChannel::scalar(1.0, 0.0, -1.0).is_err());
        assert!(GaussianState::new(DVector::zeros(2), DMatrix::zeros(3, 3)).is_err());
        let g = GaussianChannel::scalar(1.0, 0.0, 1.0).unwrap();
        assert!(g.mean(&DVector::zeros(2)).is_err());
        let sing = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(spd_inverse(&sing, "test"), Err(Error::Singular { .. })));
    }

    #[test]
    fn belief_points_round_trip() {
        let s = GaussianState::new(DVector::from_vec(vec![1.0, -2.0]), DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0])).unwrap();
        assert_eq!(GaussianState::from_point(&s.to_point()).unwrap(), s);
    }
}
