//! Open bundle systems: an open system over `p` fibred over an open system
//! over `b`.

use std::sync::Arc;

use super::rds::{Projection, SECTION_LIMIT};
use crate::coalg::{is_system_morphism, reindex, System};
use crate::error::{Error, Result};
use crate::monad::try_pushforward;
use crate::poly::{all_sections, Point, PolyMap, Section, Time};
use crate::report::LawReport;

/// A pair `(π, ϑ)` with `π : ϑ(∗) → θ(∗)` such that
/// `π ∘ ϑ^σ(t) = θ^ς(t) ∘ π` for every section `σ` of `p` and `ς` of `b`.
#[derive(Clone)]
pub struct BundleSystem {
    base: System,
    total: System,
    proj: Projection,
    times: Vec<Time>,
}

impl std::fmt::Debug for BundleSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BundleSystem({} over {})", self.total.interface(), self.base.interface())
    }
}

impl BundleSystem {
    /// Builds the bundle after checking the square for all sections of both
    /// (finite) interfaces at the given times.
    pub fn new<F>(base: System, total: System, proj: F, times: Vec<Time>) -> Result<BundleSystem>
    where
        F: Fn(&Point) -> Result<Point> + Send + Sync + 'static,
    {
        BundleSystem::from_parts(base, total, Arc::new(proj), times)?.verified()
    }

    /// Builds the bundle without checking the square.
    pub fn candidate<F>(base: System, total: System, proj: F, times: Vec<Time>) -> Result<BundleSystem>
    where
        F: Fn(&Point) -> Result<Point> + Send + Sync + 'static,
    {
        BundleSystem::from_parts(base, total, Arc::new(proj), times)
    }

    fn from_parts(base: System, total: System, proj: Projection, times: Vec<Time>) -> Result<BundleSystem> {
        if !base.time().same_as(&total.time()) {
            return Err(Error::Shape("base and total systems run on different clocks".into()));
        }
        Ok(BundleSystem { base, total, proj, times })
    }

    fn verified(self) -> Result<BundleSystem> {
        let sp = all_sections(self.total.interface(), SECTION_LIMIT)?;
        let sb = all_sections(self.base.interface(), SECTION_LIMIT)?;
        let report = check_bundle(&self, &sp, &sb, &self.times);
        if !report.passed {
            return Err(Error::Invalid(format!("bundle square fails: {:?}", report.witnesses)));
        }
        Ok(self)
    }

    pub fn base(&self) -> &System {
        &self.base
    }

    pub fn total(&self) -> &System {
        &self.total
    }

    pub fn times(&self) -> &[Time] {
        &self.times
    }

    pub fn project(&self, s: &Point) -> Result<Point> {
        (self.proj)(s)
    }
}

/// The bundle square at every total state, for each pair of sections.
pub fn check_bundle(bs: &BundleSystem, sections_p: &[Section], sections_b: &[Section], times: &[Time]) -> LawReport {
    let mut report = LawReport::new("bundle square", 0.0);
    let states = match bs.total.states().enumerate() {
        Ok(s) => s,
        Err(e) => {
            report.record_error("total states", &e);
            return report;
        }
    };
    for sigma in sections_p {
        let top = match bs.total.closure(sigma) {
            Ok(c) => c,
            Err(e) => {
                report.record_error(format!("closure by {}", sigma.name()), &e);
                continue;
            }
        };
        for vs in sections_b {
            let bottom = match bs.base.closure(vs) {
                Ok(c) => c,
                Err(e) => {
                    report.record_error(format!("base closure by {}", vs.name()), &e);
                    continue;
                }
            };
            for &t in times {
                for s in &states {
                    let ctx = || format!("σ={}, ς={}, t={t}, state {s}", sigma.name(), vs.name());
                    let lhs = top.step(t, s).and_then(|d| try_pushforward(|x| bs.project(x), &d));
                    let rhs = bs.project(s).and_then(|w| bottom.step(t, &w));
                    match (lhs, rhs) {
                        (Ok(a), Ok(b)) => report.record(a.distance(&b), ctx),
                        (Err(e), _) | (_, Err(e)) => report.record_error(ctx(), &e),
                    }
                }
            }
        }
    }
    report
}

/// `(π, φϑ)` for `φ : p → q`, re-verified.
pub fn reindex_bundle(phi: &PolyMap, bs: &BundleSystem) -> Result<BundleSystem> {
    let total = reindex(phi, &bs.total)?;
    BundleSystem::from_parts(bs.base.clone(), total, bs.proj.clone(), bs.times.clone())?.verified()
}

/// `(φ ∘ π, ϑ)` along a morphism `φ : θ → ρ` of base systems. The morphism
/// is checked over all sections of the base interface first.
pub fn rebase_bundle<F>(phi: F, rho: &System, bs: &BundleSystem) -> Result<BundleSystem>
where
    F: Fn(&Point) -> Result<Point> + Send + Sync + 'static,
{
    let sections = all_sections(bs.base.interface(), SECTION_LIMIT)?;
    let states = bs.base.states().enumerate()?;
    let report = is_system_morphism(&phi, &bs.base, rho, &sections, &bs.times, &states, 0.0)?;
    if !report.passed {
        return Err(Error::Invalid(format!("not a morphism of base systems: {:?}", report.witnesses)));
    }
    let p = bs.proj.clone();
    let proj: Projection = Arc::new(move |s| phi(&p(s)?));
    BundleSystem::from_parts(rho.clone(), bs.total.clone(), proj, bs.times.clone())?.verified()
}
