//! Continuous-time systems from vector fields, integrated by fixed-step RK4.

use std::sync::Arc;

use nalgebra::DVector;

use super::system::{Dynamics, FieldFn, System};
use crate::error::{Error, Result};
use crate::poly::{Effect, Point, Polynomial, Space, TimeMonoid};

pub(crate) fn state_vector(states: &Space, s: &Point) -> Result<DVector<f64>> {
    let n = states.flat_dim().ok_or_else(|| Error::Shape(format!("{states} is not Euclidean")))?;
    let xs = s
        .flatten_reals()
        .filter(|xs| xs.len() == n)
        .ok_or_else(|| Error::IllTyped(format!("{s} is not a point of {states}")))?;
    Ok(DVector::from_vec(xs))
}

/// One classical Runge–Kutta step of length `h` with the input held at `d`.
pub(crate) fn rk4_step(field: &FieldFn, x: &DVector<f64>, d: &Point, h: f64) -> Result<DVector<f64>> {
    let k1 = field(x, d)?;
    let k2 = field(&(x + &k1 * (h / 2.0)), d)?;
    let k3 = field(&(x + &k2 * (h / 2.0)), d)?;
    let k4 = field(&(x + &k3 * h), d)?;
    if k1.len() != x.len() {
        return Err(Error::Shape(format!("field returned a vector of length {} on R^{}", k1.len(), x.len())));
    }
    Ok(x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

impl System {
    /// The open system `(X, ∫f, g)` on `X = R^n`: output `g`, and update the
    /// RK4 solution of `ẋ = f(x, d)` with the direction `d` held fixed.
    /// Times are multiples of `h`.
    pub fn from_vector_field<F, G>(interface: Polynomial, dim: usize, h: f64, output: G, field: F) -> Result<System>
    where
        F: Fn(&DVector<f64>, &Point) -> Result<DVector<f64>> + Send + Sync + 'static,
        G: Fn(&Point) -> Result<Point> + Send + Sync + 'static,
    {
        let time = TimeMonoid::real(h)?;
        Ok(System {
            interface,
            states: Space::euclid(dim),
            time,
            effect: Effect::Deterministic,
            dynamics: Dynamics::VectorField { output: Arc::new(output), field: Arc::new(field), h },
        })
    }

    /// A closed linear system `ẋ = A x` over `y`.
    pub fn linear_flow(a: nalgebra::DMatrix<f64>, h: f64) -> Result<System> {
        if !a.is_square() {
            return Err(Error::Shape("linear flow needs a square matrix".into()));
        }
        let n = a.nrows();
        System::from_vector_field(Polynomial::y(), n, h, |_| Ok(Point::Unit), move |x, _| Ok(&a * x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{Section, Time};

    #[test]
    fn exponential_decay_at_one() {
        let sys = System::linear_flow(nalgebra::DMatrix::from_element(1, 1, -1.0), 1e-3).unwrap();
        let cl = sys.closure(&Section::unique(&Polynomial::y()).unwrap()).unwrap();
        let t = sys.time().from_real(1.0).unwrap();
        let x = cl.step(t, &Point::vector(vec![1.0])).unwrap();
        let v = x.as_dirac().unwrap().as_vector().unwrap()[0];
        assert!((v - (-1.0f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn constant_input_integrates_linearly() {
        let p = Polynomial::monomial(Space::euclid(1), Space::euclid(1));
        let sys = System::from_vector_field(p.clone(), 1, 1e-3, |x| Ok(x.clone()), |_, d| {
            Ok(DVector::from_vec(d.flatten_reals().unwrap()))
        })
        .unwrap();
        let sec = Section::constant(&p, Point::vector(vec![2.0])).unwrap();
        let cl = sys.closure(&sec).unwrap();
        let out = cl.step(Time(1000), &Point::vector(vec![0.0])).unwrap();
        assert!((out.as_dirac().unwrap().as_vector().unwrap()[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn off_grid_time_is_rejected() {
        let sys = System::linear_flow(nalgebra::DMatrix::from_element(1, 1, -1.0), 1e-3).unwrap();
        assert!(matches!(sys.time().from_real(0.0005), Err(Error::OffGrid(_))));
    }
}
