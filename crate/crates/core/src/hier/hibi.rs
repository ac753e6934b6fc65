//! Composition of hierarchical systems whose forward inputs are beliefs.
//!
//! A morphism `(A, S) → (B, T)` is a system `𝒫A y^S → B y^T`: it receives a
//! law over `A` and emits a point of `B`. Composing with `(B, T) → (C, U)`
//! lifts the emitted point along the unit `η_B : B → 𝒫B` first. Beliefs over
//! `ℝⁿ` are Gaussian, encoded as points `(mean, covariance)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::poly::{compose_map, Point, PolyMap, Polynomial, Space};

use super::compose::compose_hier;
use super::system::HierSystem;

/// `𝒫ℝⁿ` restricted to Gaussians: `ℝⁿ × ℝ^{n·n}` (column-major covariance).
pub fn belief_space(n: usize) -> Space {
    Space::pair(Space::euclid(n), Space::euclid(n * n))
}

pub fn belief_point(mean: &DVector<f64>, cov: &DMatrix<f64>) -> Point {
    Point::pair(Point::vector(mean.as_slice().to_vec()), Point::vector(cov.as_slice().to_vec()))
}

pub fn belief_from_point(p: &Point) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let mean = p
        .component(0)?
        .as_vector()
        .ok_or_else(|| Error::IllTyped(format!("{p} is not a belief")))?;
    let cov = p
        .component(1)?
        .as_vector()
        .ok_or_else(|| Error::IllTyped(format!("{p} is not a belief")))?;
    let n = mean.len();
    if cov.len() != n * n {
        return Err(Error::Shape(format!("belief of dimension {n} with {} covariance entries", cov.len())));
    }
    Ok((DVector::from_column_slice(mean), DMatrix::from_column_slice(n, n, cov)))
}

/// `η : ℝⁿ y^T → 𝒫ℝⁿ y^T`, `b ↦ (b, 0)`, identity on directions.
pub fn eta_lens(n: usize, dirs: &Space) -> PolyMap {
    PolyMap::lens(
        Polynomial::monomial(Space::euclid(n), dirs.clone()),
        Polynomial::monomial(belief_space(n), dirs.clone()),
        move |b| {
            let mean = DVector::from_column_slice(b.as_vector().expect("point of ℝⁿ"));
            belief_point(&mean, &DMatrix::zeros(n, n))
        },
        |_, d| d.clone(),
    )
}

/// Post-composes every emitted morphism of `f` with `η`.
pub fn lift_unit(f: &HierSystem) -> Result<HierSystem> {
    let (n, dirs) = match (f.target.positions(), f.target.constant_directions()) {
        (Space::Euclid { dim }, Some(dirs)) => (*dim, dirs.clone()),
        _ => {
            return Err(Error::Shape(format!(
                "forward output {} is not a monomial over ℝⁿ",
                f.target
            )))
        }
    };
    let eta = eta_lens(n, &dirs);
    let inner = f.clone();
    let lifted = HierSystem {
        target: eta.target().clone(),
        emit: std::sync::Arc::new(move |x| compose_map(&eta, &inner.emit(x)?)),
        ..f.clone()
    };
    Ok(lifted)
}

/// `g ∘ f` in the belief-input setting: `f`'s emitted point is lifted along
/// `η` and fed to `g`'s belief input.
pub fn hibi_compose(f: &HierSystem, g: &HierSystem) -> Result<HierSystem> {
    let lifted = lift_unit(f)?;
    if lifted.target != g.source {
        return Err(Error::Shape(format!(
            "cannot feed {} into a system over {}",
            f.target, g.source
        )));
    }
    compose_hier(&lifted, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monad::Dist;

    /// `𝒫ℝ y^ℝ → ℝ y^ℝ`: emits `scale · (mean of the belief) + state`;
    /// passes `t + state` back; the state accumulates backward inputs.
    fn level(scale: f64) -> HierSystem {
        let p = Polynomial::monomial(belief_space(1), Space::euclid(1));
        let q = Polynomial::monomial(Space::euclid(1), Space::euclid(1));
        HierSystem::from_lens_parts(
            p,
            q,
            Space::euclid(1),
            move |x, b| {
                let (m, _) = belief_from_point(b)?;
                Ok(Point::vector(vec![scale * m[0] + x.as_vector().unwrap()[0]]))
            },
            |x, _, t| Ok(Point::vector(vec![t.as_vector().unwrap()[0] + x.as_vector().unwrap()[0]])),
            |x, _, t| Ok(Dist::Dirac(Point::vector(vec![x.as_vector().unwrap()[0] + t.as_vector().unwrap()[0]]))),
        )
        .unwrap()
    }

    fn v(x: f64) -> Point {
        Point::vector(vec![x])
    }

    #[test]
    fn forward_is_g_after_eta_of_f() {
        let (f, g) = (level(2.0), level(3.0));
        let c = hibi_compose(&f, &g).unwrap();
        let b = belief_point(&DVector::from_vec(vec![1.5]), &DMatrix::from_element(1, 1, 0.3));
        for (x, y) in [(0.0, 0.0), (0.5, -1.0), (2.0, 4.0)] {
            let out = c.emit(&Point::pair(v(x), v(y))).unwrap().forward(&b).unwrap();
            let mid = f.emit(&v(x)).unwrap().forward(&b).unwrap();
            let lifted = eta_lens(1, &Space::euclid(1)).forward(&mid).unwrap();
            assert_eq!(out, g.emit(&v(y)).unwrap().forward(&lifted).unwrap());
        }
    }

    #[test]
    fn backward_threads_through_g_then_f() {
        let c = hibi_compose(&level(2.0), &level(3.0)).unwrap();
        let b = belief_point(&DVector::from_vec(vec![0.0]), &DMatrix::from_element(1, 1, 1.0));
        // g passes back t + y, then f passes back (t + y) + x
        for t in [-1.0, 0.0, 0.25, 7.0] {
            let s = Point::pair(v(0.5), v(2.0));
            let back = c.emit(&s).unwrap().backward_point(&b, &v(t)).unwrap();
            assert_eq!(back, v(t + 2.0 + 0.5));
            let next = c.absorb(&s, &b, &v(t)).unwrap();
            assert_eq!(next, Dist::Dirac(Point::pair(v(0.5 + t + 2.0), v(2.0 + t))));
        }
    }

    #[test]
    fn mismatched_middle_is_rejected() {
        let p = Polynomial::monomial(belief_space(2), Space::euclid(1));
        let g = HierSystem::constant(PolyMap::identity(&p));
        assert!(hibi_compose(&level(1.0), &g).is_err());
        assert!(belief_from_point(&Point::pair(v(1.0), Point::vector(vec![1.0, 2.0]))).is_err());
    }
}
