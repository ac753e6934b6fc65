//! Morphisms of polynomials (lenses), deterministic or with stochastic
//! backward maps.

use std::fmt;
use std::sync::Arc;

use super::polynomial::Polynomial;
use super::space::Point;
use crate::error::{Error, Result};
use crate::monad::{dst, Dist, Kernel};

/// Whether a backward map may return non-Dirac distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Effect {
    Deterministic,
    Stochastic,
}

impl Effect {
    pub fn join(self, other: Effect) -> Effect {
        if self == Effect::Deterministic && other == Effect::Deterministic {
            Effect::Deterministic
        } else {
            Effect::Stochastic
        }
    }
}

type ForwardFn = dyn Fn(&Point) -> Result<Point> + Send + Sync;
type BackwardFn = dyn Fn(&Point, &Point) -> Result<Dist> + Send + Sync;

/// A polynomial morphism `f : p → q`: a forward map `f₁` on positions and,
/// at each position `i`, a backward map `f^#ᵢ : q[f₁ i] → Dist p[i]`.
#[derive(Clone)]
pub struct PolyMap {
    source: Polynomial,
    target: Polynomial,
    forward: Arc<ForwardFn>,
    backward: Arc<BackwardFn>,
    effect: Effect,
}

impl fmt::Debug for PolyMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyMap({} -> {}, {:?})", self.source, self.target, self.effect)
    }
}

impl PolyMap {
    /// General constructor. Inputs and outputs are type-checked on every
    /// application; for `Effect::Deterministic` the backward map must return
    /// Diracs.
    pub fn new<F, B>(source: Polynomial, target: Polynomial, forward: F, backward: B, effect: Effect) -> PolyMap
    where
        F: Fn(&Point) -> Result<Point> + Send + Sync + 'static,
        B: Fn(&Point, &Point) -> Result<Dist> + Send + Sync + 'static,
    {
        PolyMap { source, target, forward: Arc::new(forward), backward: Arc::new(backward), effect }
    }

    /// A deterministic lens from plain functions.
    pub fn lens<F, B>(source: Polynomial, target: Polynomial, forward: F, backward: B) -> PolyMap
    where
        F: Fn(&Point) -> Point + Send + Sync + 'static,
        B: Fn(&Point, &Point) -> Point + Send + Sync + 'static,
    {
        PolyMap::new(
            source,
            target,
            move |i| Ok(forward(i)),
            move |i, d| Ok(Dist::Dirac(backward(i, d))),
            Effect::Deterministic,
        )
    }

    /// A lens between linear polynomials `Ay → By`, given by `A → B`.
    pub fn linear<F>(source: Polynomial, target: Polynomial, f: F) -> Result<PolyMap>
    where
        F: Fn(&Point) -> Point + Send + Sync + 'static,
    {
        if !source.is_linear() || !target.is_linear() {
            return Err(Error::Shape(format!("{source} -> {target} is not a map of linear polynomials")));
        }
        let src = source.clone();
        Ok(PolyMap::new(
            source,
            target,
            move |i| Ok(f(i)),
            move |i, _| Ok(Dist::Dirac(src.directions_at(i)?.unique_point().expect("linear"))),
            Effect::Deterministic,
        ))
    }

    pub fn identity(p: &Polynomial) -> PolyMap {
        PolyMap::new(
            p.clone(),
            p.clone(),
            |i| Ok(i.clone()),
            |_, d| Ok(Dist::Dirac(d.clone())),
            Effect::Deterministic,
        )
    }

    pub fn source(&self) -> &Polynomial {
        &self.source
    }

    pub fn target(&self) -> &Polynomial {
        &self.target
    }

    pub fn effect(&self) -> Effect {
        self.effect
    }

    pub fn is_deterministic(&self) -> bool {
        self.effect == Effect::Deterministic
    }

    /// `f₁(i)`.
    pub fn forward(&self, i: &Point) -> Result<Point> {
        self.source.positions().check(i, "source position")?;
        let j = (self.forward)(i)?;
        self.target.positions().check(&j, "target position")?;
        Ok(j)
    }

    /// `f^#(i, d′)` for `d′ ∈ q[f₁ i]`.
    pub fn backward(&self, i: &Point, d: &Point) -> Result<Dist> {
        let j = self.forward(i)?;
        self.target.directions_at(&j)?.check(d, "target direction")?;
        let out = (self.backward)(i, d)?;
        let dirs = self.source.directions_at(i)?;
        if !out.is_over(dirs) {
            return Err(Error::IllTyped(format!("backward output {out:?} is not a law over {dirs}")));
        }
        if self.effect == Effect::Deterministic && !out.is_dirac() {
            return Err(Error::NotDeterministic(format!("backward map at {i} returned a {}", out.kind_name())));
        }
        Ok(out)
    }

    /// Deterministic backward value.
    pub fn backward_point(&self, i: &Point, d: &Point) -> Result<Point> {
        self.backward(i, d)?.into_dirac("deterministic backward map")
    }

    /// Forgets that the map is deterministic.
    pub fn into_stochastic(mut self) -> PolyMap {
        self.effect = Effect::Stochastic;
        self
    }

    /// Largest discrepancy between two maps with the same interfaces, by
    /// exhaustive enumeration of positions and target directions. Forward
    /// disagreement counts as infinite.
    pub fn discrepancy(&self, other: &PolyMap) -> Result<f64> {
        if self.source.normalized() != other.source.normalized() || self.target.normalized() != other.target.normalized() {
            return Err(Error::Shape(format!(
                "comparing {} -> {} with {} -> {}",
                self.source, self.target, other.source, other.target
            )));
        }
        let mut worst: f64 = 0.0;
        for i in self.source.positions().enumerate()? {
            let j = self.forward(&i)?;
            if j.normalized() != other.forward(&i)?.normalized() {
                return Ok(f64::INFINITY);
            }
            for d in self.target.directions_at(&j)?.enumerate()? {
                let a = self.backward(&i, &d)?;
                let b = other.backward(&i, &d)?;
                worst = worst.max(a.normalized_points().distance(&b.normalized_points()));
            }
        }
        Ok(worst)
    }
}

/// `g ∘ f`: forward `g₁ ∘ f₁`, backward the Kleisli composite
/// `f^#ᵢ ∘ g^#_{f₁ i}`.
pub fn compose_map(g: &PolyMap, f: &PolyMap) -> Result<PolyMap> {
    if f.target != g.source {
        return Err(Error::Shape(format!(
            "cannot compose {} -> {} after {} -> {}",
            g.source, g.target, f.source, f.target
        )));
    }
    let (f1, g1) = (f.clone(), g.clone());
    let (f2, g2) = (f.clone(), g.clone());
    Ok(PolyMap::new(
        f.source.clone(),
        g.target.clone(),
        move |i| g1.forward(&f1.forward(i)?),
        move |i, d| {
            let j = f2.forward(i)?;
            let mid = g2.backward(&j, d)?;
            let fi = f2.clone();
            let i = i.clone();
            Kernel::new(move |e| fi.backward(&i, e)).extend(&mid)
        },
        f.effect.join(g.effect),
    ))
}

/// `f ⊗ g`: product forward map, backward maps joined by `dst`.
pub fn tensor_map(f: &PolyMap, g: &PolyMap) -> PolyMap {
    let (fa, ga) = (f.clone(), g.clone());
    let (fb, gb) = (f.clone(), g.clone());
    PolyMap::new(
        f.source.tensor(&g.source),
        f.target.tensor(&g.target),
        move |ij| Ok(Point::pair(fa.forward(ij.component(0)?)?, ga.forward(ij.component(1)?)?)),
        move |ij, de| {
            let a = fb.backward(ij.component(0)?, de.component(0)?)?;
            let b = gb.backward(ij.component(1)?, de.component(1)?)?;
            dst(&a, &b)
        },
        f.effect.join(g.effect),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Space;

    fn l(s: &str) -> Point {
        Point::label(s)
    }

    fn ab() -> Space {
        Space::finite(["a", "b"]).unwrap()
    }

    fn st() -> Space {
        Space::finite(["s", "t"]).unwrap()
    }

    fn swap_lens() -> PolyMap {
        let p = Polynomial::monomial(ab(), st());
        PolyMap::lens(
            p.clone(),
            p,
            |i| if i == &l("a") { l("b") } else { l("a") },
            |i, d| if i == &l("a") { d.clone() } else if d == &l("s") { l("t") } else { l("s") },
        )
    }

    fn coin_map() -> PolyMap {
        let p = Polynomial::monomial(ab(), st());
        PolyMap::new(
            p.clone(),
            p,
            |i| Ok(i.clone()),
            |i, d| {
                let bias = if i == &l("a") { 0.3 } else { 0.6 };
                let w = if d == &l("s") { bias } else { 1.0 - bias };
                Dist::categorical([(l("s"), w), (l("t"), 1.0 - w)])
            },
            Effect::Stochastic,
        )
    }

    #[test]
    fn unit_laws() {
        let f = swap_lens();
        let id = PolyMap::identity(f.source());
        assert_eq!(compose_map(&id, &f).unwrap().discrepancy(&f).unwrap(), 0.0);
        assert_eq!(compose_map(&f, &id).unwrap().discrepancy(&f).unwrap(), 0.0);
        let c = coin_map();
        assert_eq!(compose_map(&id, &c).unwrap().discrepancy(&c).unwrap(), 0.0);
    }

    #[test]
    fn deterministic_composite_matches_pointwise() {
        let f = swap_lens();
        let ff = compose_map(&f, &f).unwrap();
        for i in ab().enumerate().unwrap() {
            assert_eq!(ff.forward(&i).unwrap(), f.forward(&f.forward(&i).unwrap()).unwrap());
            for d in st().enumerate().unwrap() {
                let j = f.forward(&i).unwrap();
                let expect = f.backward_point(&i, &f.backward_point(&j, &d).unwrap()).unwrap();
                assert_eq!(ff.backward_point(&i, &d).unwrap(), expect);
            }
        }
    }

    #[test]
    fn stochastic_composite_is_chapman_kolmogorov() {
        let c = coin_map();
        let cc = compose_map(&c, &c).unwrap();
        for i in ab().enumerate().unwrap() {
            for d in st().enumerate().unwrap() {
                let mid = c.backward(&i, &d).unwrap();
                for e in st().enumerate().unwrap() {
                    let oracle: f64 = st()
                        .enumerate()
                        .unwrap()
                        .iter()
                        .map(|m| mid.weight(m) * c.backward(&i, m).unwrap().weight(&e))
                        .sum();
                    assert!((cc.backward(&i, &d).unwrap().weight(&e) - oracle).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn tensor_of_stochastic_is_product() {
        let c = coin_map();
        let t = tensor_map(&c, &c);
        let i = Point::pair(l("a"), l("b"));
        let d = Point::pair(l("s"), l("t"));
        let law = t.backward(&i, &d).unwrap();
        let m1 = c.backward(&l("a"), &l("s")).unwrap();
        let m2 = c.backward(&l("b"), &l("t")).unwrap();
        for x in st().enumerate().unwrap() {
            for y in st().enumerate().unwrap() {
                let w = law.weight(&Point::pair(x.clone(), y.clone()));
                assert!((w - m1.weight(&x) * m2.weight(&y)).abs() < 1e-15);
            }
        }
        let idt = tensor_map(&PolyMap::identity(c.source()), &PolyMap::identity(c.source()));
        assert_eq!(idt.discrepancy(&PolyMap::identity(&c.source().tensor(c.source()))).unwrap(), 0.0);
    }

    #[test]
    fn tensor_functoriality() {
        let (f, c) = (swap_lens(), coin_map());
        let lhs = tensor_map(&compose_map(&c, &f).unwrap(), &compose_map(&f, &c).unwrap());
        let rhs = compose_map(&tensor_map(&c, &f), &tensor_map(&f, &c)).unwrap();
        assert!(lhs.discrepancy(&rhs).unwrap() < 1e-15);
    }

    #[test]
    fn mismatch_is_reported() {
        let f = swap_lens();
        let g = PolyMap::identity(&Polynomial::y());
        assert!(matches!(compose_map(&g, &f), Err(Error::Shape(_))));
        let bad = PolyMap::new(
            f.source().clone(),
            f.target().clone(),
            |i| Ok(i.clone()),
            |_, _| Dist::categorical([(l("s"), 0.5), (l("t"), 0.5)]),
            Effect::Deterministic,
        );
        assert!(matches!(bad.backward(&l("a"), &l("s")), Err(Error::NotDeterministic(_))));
    }
}
