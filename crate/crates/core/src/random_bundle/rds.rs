//! Open random dynamical systems over a measure-preserving base flow.

use std::sync::Arc;

use super::measure::{MeasurePreservingSystem, MpMorphism};
use crate::coalg::{reindex, System};
use crate::error::{Error, Result};
use crate::monad::try_pushforward;
use crate::poly::{all_sections, Effect, Point, PolyMap, Section, Time};
use crate::report::LawReport;

pub(crate) type Projection = Arc<dyn Fn(&Point) -> Result<Point> + Send + Sync>;

/// Sections enumerated for exact square checks.
pub const SECTION_LIMIT: usize = 4096;

/// An open system on a bundle `π : S → Ω` over a measure-preserving flow
/// `θ` on `Ω`, such that `π ∘ ϑ^σ(t) = θ(t) ∘ π` for every section `σ`.
#[derive(Clone)]
pub struct RandomSystem {
    base: MeasurePreservingSystem,
    system: System,
    proj: Projection,
    times: Vec<Time>,
}

impl std::fmt::Debug for RandomSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RandomSystem({} over {})", self.system.states(), self.base.states())
    }
}

impl RandomSystem {
    /// Builds the system after confirming the defining square for all
    /// sections of the (finite) interface and the given times.
    pub fn new<F>(base: MeasurePreservingSystem, system: System, proj: F, times: Vec<Time>) -> Result<RandomSystem>
    where
        F: Fn(&Point) -> Result<Point> + Send + Sync + 'static,
    {
        RandomSystem::from_parts(base, system, Arc::new(proj), times)?.verified()
    }

    /// Builds the system without checking the square.
    pub fn candidate<F>(base: MeasurePreservingSystem, system: System, proj: F, times: Vec<Time>) -> Result<RandomSystem>
    where
        F: Fn(&Point) -> Result<Point> + Send + Sync + 'static,
    {
        RandomSystem::from_parts(base, system, Arc::new(proj), times)
    }

    fn from_parts(base: MeasurePreservingSystem, system: System, proj: Projection, times: Vec<Time>) -> Result<RandomSystem> {
        if system.effect() != Effect::Deterministic {
            return Err(Error::NotDeterministic("random systems have deterministic updates".into()));
        }
        if !system.time().same_as(&base.flow().time()) {
            return Err(Error::Shape("system and base flow run on different clocks".into()));
        }
        Ok(RandomSystem { base, system, proj, times })
    }

    fn verified(self) -> Result<RandomSystem> {
        let sections = all_sections(self.system.interface(), SECTION_LIMIT)?;
        let report = check_random_system(&self, &sections, &self.times);
        if !report.passed {
            return Err(Error::Invalid(format!("random-system square fails: {:?}", report.witnesses)));
        }
        Ok(self)
    }

    /// The skew product on `Ω × X`: the noise coordinate follows the base
    /// flow while `next(ω, x, d)` updates the fibre.
    pub fn skew_product<O, N>(
        base: MeasurePreservingSystem,
        fibre: crate::poly::Space,
        interface: crate::poly::Polynomial,
        output: O,
        next: N,
        times: Vec<Time>,
    ) -> Result<RandomSystem>
    where
        O: Fn(&Point, &Point) -> Point + Send + Sync + 'static,
        N: Fn(&Point, &Point, &Point) -> Point + Send + Sync + 'static,
    {
        let flow = base.flow().clone();
        let states = crate::poly::Space::pair(base.states().clone(), fibre);
        let system = System::discrete(
            interface,
            states,
            Effect::Deterministic,
            move |s| Ok(output(s.component(0)?, s.component(1)?)),
            move |s, d| {
                let (w, x) = (s.component(0)?, s.component(1)?);
                let w2 = flow.step(Time(1), w)?.into_dirac("base flow")?;
                Ok(crate::monad::Dist::Dirac(Point::pair(w2, next(w, x, d))))
            },
        );
        RandomSystem::new(base, system, |s| Ok(s.component(0)?.clone()), times)
    }

    pub fn base(&self) -> &MeasurePreservingSystem {
        &self.base
    }

    pub fn system(&self) -> &System {
        &self.system
    }

    pub fn times(&self) -> &[Time] {
        &self.times
    }

    pub fn project(&self, s: &Point) -> Result<Point> {
        (self.proj)(s)
    }
}

/// `π ∘ ϑ^σ(t) = θ(t) ∘ π` at every total state, section and time.
pub fn check_random_system(rds: &RandomSystem, sections: &[Section], times: &[Time]) -> LawReport {
    let mut report = LawReport::new("random system square", 0.0);
    let states = match rds.system.states().enumerate() {
        Ok(s) => s,
        Err(e) => {
            report.record_error("total states", &e);
            return report;
        }
    };
    for sigma in sections {
        let cl = match rds.system.closure(sigma) {
            Ok(c) => c,
            Err(e) => {
                report.record_error(format!("closure by {}", sigma.name()), &e);
                continue;
            }
        };
        for &t in times {
            for s in &states {
                let ctx = || format!("section {}, t={t}, state {s}", sigma.name());
                let lhs = cl.step(t, s).and_then(|d| try_pushforward(|x| rds.project(x), &d));
                let rhs = rds.project(s).and_then(|w| rds.base.flow().step(t, &w));
                match (lhs, rhs) {
                    (Ok(a), Ok(b)) => report.record(a.distance(&b), ctx),
                    (Err(e), _) | (_, Err(e)) => report.record_error(ctx(), &e),
                }
            }
        }
    }
    report
}

/// `(π, φ₁ ∘ ϑ^o, ϑ^u ∘ ϑ^{o*}φ^#)`, re-verified.
pub fn reindex_rds(phi: &PolyMap, rds: &RandomSystem) -> Result<RandomSystem> {
    let system = reindex(phi, &rds.system)?;
    RandomSystem::from_parts(rds.base.clone(), system, rds.proj.clone(), rds.times.clone())?.verified()
}

/// `(ψ ∘ π, ϑ)` over the target of a measure-preserving morphism,
/// re-verified.
pub fn rebase_rds(psi: &MpMorphism, rds: &RandomSystem) -> Result<RandomSystem> {
    if psi.source.states() != rds.base.states() {
        return Err(Error::Shape("rebasing along a morphism from a different base".into()));
    }
    let (p, f) = (rds.proj.clone(), psi.map.clone());
    let proj: Projection = Arc::new(move |s| f(&p(s)?));
    RandomSystem::from_parts(psi.target.clone(), rds.system.clone(), proj, rds.times.clone())?.verified()
}
