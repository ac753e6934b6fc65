//! Probability spaces and measure-preserving closed systems.

use std::sync::Arc;

use super::rds::Projection;
use crate::coalg::ClosedSystem;
use crate::error::{Error, Result};
use crate::monad::{try_pushforward, Dist};
use crate::poly::{Effect, Point, Space, Time};
use crate::report::LawReport;

/// A finite space with a probability measure on it.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilitySpace {
    space: Space,
    measure: Dist,
}

impl ProbabilitySpace {
    pub fn new(space: Space, measure: Dist) -> Result<ProbabilitySpace> {
        space.enumerate()?;
        if measure.atoms().is_none() || !measure.is_over(&space) {
            return Err(Error::Invalid(format!("measure is not a finite law over {space}")));
        }
        Ok(ProbabilitySpace { space, measure })
    }

    pub fn uniform(space: Space) -> Result<ProbabilitySpace> {
        let m = Dist::uniform(&space.enumerate()?)?;
        ProbabilitySpace::new(space, m)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn measure(&self) -> &Dist {
        &self.measure
    }
}

/// A deterministic closed system on a probability space whose steps are
/// meant to preserve the measure.
#[derive(Debug, Clone)]
pub struct MeasurePreservingSystem {
    base: ProbabilitySpace,
    flow: ClosedSystem,
    generators: Vec<Time>,
}

impl MeasurePreservingSystem {
    /// Builds the system after confirming `𝒫θ(t) ∘ β = β` at every
    /// generator time.
    pub fn new(base: ProbabilitySpace, flow: ClosedSystem, generators: Vec<Time>) -> Result<MeasurePreservingSystem> {
        let mp = MeasurePreservingSystem::candidate(base, flow, generators)?;
        let report = check_measure_preserving(&mp, &mp.generators);
        if !report.passed {
            return Err(Error::Invalid(format!("flow does not preserve the measure: {:?}", report.witnesses)));
        }
        Ok(mp)
    }

    /// Builds the system without checking measure preservation.
    pub fn candidate(base: ProbabilitySpace, flow: ClosedSystem, generators: Vec<Time>) -> Result<MeasurePreservingSystem> {
        if flow.states() != base.space() {
            return Err(Error::Shape(format!("flow on {} over a base {}", flow.states(), base.space())));
        }
        if flow.effect() != Effect::Deterministic {
            return Err(Error::NotDeterministic("base flows are deterministic".into()));
        }
        Ok(MeasurePreservingSystem { base, flow, generators })
    }

    /// The cyclic shift `k ↦ k + 1 mod n` with the uniform measure.
    pub fn cyclic_shift(n: usize) -> Result<MeasurePreservingSystem> {
        let space = Space::range(n);
        let flow = ClosedSystem::generated(space.clone(), Effect::Deterministic, move |k| {
            Ok(Dist::Dirac(Point::label(((label_index(k)? + 1) % n).to_string())))
        });
        MeasurePreservingSystem::new(ProbabilitySpace::uniform(space)?, flow, vec![Time(1)])
    }

    pub fn base(&self) -> &ProbabilitySpace {
        &self.base
    }

    pub fn flow(&self) -> &ClosedSystem {
        &self.flow
    }

    pub fn generators(&self) -> &[Time] {
        &self.generators
    }

    pub fn states(&self) -> &Space {
        self.base.space()
    }
}

pub(crate) fn label_index(p: &Point) -> Result<usize> {
    p.as_label()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::IllTyped(format!("{p} is not a numeric label")))
}

/// `𝒫θ(t) ∘ β = β` at each of the given times.
pub fn check_measure_preserving(mp: &MeasurePreservingSystem, generators: &[Time]) -> LawReport {
    let mut report = LawReport::new("measure preservation", 0.0);
    for &t in generators {
        match mp.flow.extend(t, mp.base.measure()) {
            Ok(image) => report.record(image.distance(mp.base.measure()), || format!("t={t}: image {}", image.to_json())),
            Err(e) => report.record_error(format!("t={t}"), &e),
        }
    }
    report
}

/// A map of measure-preserving systems, checked to commute with both flows
/// and to push one measure onto the other.
#[derive(Clone)]
pub struct MpMorphism {
    pub(crate) source: MeasurePreservingSystem,
    pub(crate) target: MeasurePreservingSystem,
    pub(crate) map: Projection,
}

impl std::fmt::Debug for MpMorphism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MpMorphism({} -> {})", self.source.states(), self.target.states())
    }
}

impl MpMorphism {
    pub fn new<F>(source: MeasurePreservingSystem, target: MeasurePreservingSystem, map: F) -> Result<MpMorphism>
    where
        F: Fn(&Point) -> Result<Point> + Send + Sync + 'static,
    {
        let m = MpMorphism { source, target, map: Arc::new(map) };
        let report = m.check();
        if !report.passed {
            return Err(Error::Invalid(format!("not a morphism of measure-preserving systems: {:?}", report.witnesses)));
        }
        Ok(m)
    }

    fn check(&self) -> LawReport {
        let mut report = LawReport::new("measure-preserving morphism", 0.0);
        let f = |p: &Point| (self.map)(p);
        match try_pushforward(f, self.source.base.measure()) {
            Ok(image) => report.record(image.distance(self.target.base.measure()), || "measure".into()),
            Err(e) => report.record_error("measure", &e),
        }
        let times: Vec<Time> = self.source.generators.iter().chain(&self.target.generators).copied().collect();
        for w in self.source.states().enumerate().unwrap_or_default() {
            for &t in &times {
                let lhs = self.source.flow.step(t, &w).and_then(|d| try_pushforward(f, &d));
                let rhs = f(&w).and_then(|v| self.target.flow.step(t, &v));
                match (lhs, rhs) {
                    (Ok(a), Ok(b)) => report.record(a.distance(&b), || format!("flow at t={t}, {w}")),
                    (Err(e), _) | (_, Err(e)) => report.record_error(format!("flow at t={t}, {w}"), &e),
                }
            }
        }
        report
    }

    pub fn apply(&self, p: &Point) -> Result<Point> {
        (self.map)(p)
    }

    pub fn target(&self) -> &MeasurePreservingSystem {
        &self.target
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_shift_preserves_uniform() {
        let mp = MeasurePreservingSystem::cyclic_shift(6).unwrap();
        assert!(check_measure_preserving(&mp, &[Time(1), Time(2), Time(5)]).passed);
    }

    #[test]
    fn window_rotation_preserves_product_measure() {
        let bit = Space::finite(["0", "1"]).unwrap();
        let space = Space::prod(vec![bit.clone(), bit.clone(), bit]);
        let measure = Dist::uniform(&space.enumerate().unwrap()).unwrap();
        let flow = ClosedSystem::generated(space.clone(), Effect::Deterministic, |w| {
            let xs = w.as_tuple().unwrap();
            Ok(Dist::Dirac(Point::Tuple(vec![xs[1].clone(), xs[2].clone(), xs[0].clone()])))
        });
        let mp = MeasurePreservingSystem::new(ProbabilitySpace::new(space, measure).unwrap(), flow, vec![Time(1)]).unwrap();
        assert!(check_measure_preserving(&mp, &[Time(1), Time(3)]).passed);
    }

    #[test]
    fn biased_swap_fails() {
        let s = Space::range(2);
        let m = Dist::categorical([(Point::label("0"), 0.9), (Point::label("1"), 0.1)]).unwrap();
        let flow = ClosedSystem::generated(s.clone(), Effect::Deterministic, |k| {
            Ok(Dist::Dirac(Point::label(if k == &Point::label("0") { "1" } else { "0" })))
        });
        let base = ProbabilitySpace::new(s, m).unwrap();
        assert!(MeasurePreservingSystem::new(base.clone(), flow.clone(), vec![Time(1)]).is_err());
        let mp = MeasurePreservingSystem::candidate(base, flow, vec![Time(1)]).unwrap();
        let r = check_measure_preserving(&mp, &[Time(1)]);
        assert!(!r.passed);
        assert!((r.max_deviation - 0.8).abs() < 1e-12);
    }

    #[test]
    fn doubling_quotient_is_a_morphism() {
        let z6 = MeasurePreservingSystem::cyclic_shift(6).unwrap();
        let z3 = MeasurePreservingSystem::cyclic_shift(3).unwrap();
        let q = MpMorphism::new(z6.clone(), z3.clone(), |k| Ok(Point::label((label_index(k)? % 3).to_string())));
        assert!(q.is_ok());
        let bad = MpMorphism::new(z6, z3, |k| Ok(Point::label((label_index(k)? / 2).to_string())));
        assert!(bad.is_err());
    }
}
