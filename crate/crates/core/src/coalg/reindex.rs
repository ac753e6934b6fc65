//! Opindexing: pushing a system forward along a polynomial morphism, and
//! morphisms of systems.

use std::sync::Arc;

use super::system::{Dynamics, System};
use crate::error::{Error, Result};
use crate::monad::{try_pushforward, Kernel};
use crate::poly::{Effect, Point, PolyMap, Section, Time};
use crate::report::LawReport;

/// `φ_*(X, ϑ^o, ϑ^u) = (X, φ₁ ∘ ϑ^o, ϑ^u ∘ ϑ^{o*}φ^#)`.
///
/// A stochastic `φ` may only reindex a stochastic system; the two backward
/// steps are then Kleisli-composed.
pub fn reindex(phi: &PolyMap, sys: &System) -> Result<System> {
    if phi.source() != sys.interface() {
        return Err(Error::Shape(format!(
            "reindexing a system over {} along a map from {}",
            sys.interface(),
            phi.source()
        )));
    }
    if !phi.is_deterministic() && sys.effect() == Effect::Deterministic {
        return Err(Error::NotDeterministic("a deterministic system reindexed along a stochastic map".into()));
    }
    let dynamics = match &sys.dynamics {
        Dynamics::Discrete { output, update } => {
            let (o1, f1) = (output.clone(), phi.clone());
            let (o2, u2, f2) = (output.clone(), update.clone(), phi.clone());
            Dynamics::Discrete {
                output: Arc::new(move |s| f1.forward(&o1(s)?)),
                update: Arc::new(move |s, d| {
                    let pulled = f2.backward(&o2(s)?, d)?;
                    let (u, s) = (u2.clone(), s.clone());
                    Kernel::new(move |e| u(&s, e)).extend(&pulled)
                }),
            }
        }
        Dynamics::TimeIndexed { output, update } => {
            let (o1, f1) = (output.clone(), phi.clone());
            let (o2, u2, f2) = (output.clone(), update.clone(), phi.clone());
            Dynamics::TimeIndexed {
                output: Arc::new(move |t, s| f1.forward(&o1(t, s)?)),
                update: Arc::new(move |t, s, d| {
                    let pulled = f2.backward(&o2(t, s)?, d)?;
                    let (u, s) = (u2.clone(), s.clone());
                    Kernel::new(move |e| u(t, &s, e)).extend(&pulled)
                }),
            }
        }
        Dynamics::VectorField { output, field, h } => {
            if !phi.is_deterministic() {
                return Err(Error::NotDeterministic("vector fields reindex along deterministic maps only".into()));
            }
            let (o1, f1) = (output.clone(), phi.clone());
            let (o2, fld, f2, states) = (output.clone(), field.clone(), phi.clone(), sys.states.clone());
            Dynamics::VectorField {
                output: Arc::new(move |s| f1.forward(&o1(s)?)),
                field: Arc::new(move |x, d| {
                    let here = Point::from_reals(&states, x.as_slice())?;
                    let e = f2.backward_point(&o2(&here)?, d)?;
                    fld(x, &e)
                }),
                h: *h,
            }
        }
    };
    Ok(System {
        interface: phi.target().clone(),
        states: sys.states.clone(),
        time: sys.time,
        effect: sys.effect.join(phi.effect()),
        dynamics,
    })
}

/// Checks that `f : X → Y` is a morphism of systems `a → b` over the same
/// interface: outputs agree, `β^o_b(t, f x) = β^o_a(t, x)`, and updates
/// commute, `𝒫f ∘ β^u_a(t, x, d) = β^u_b(t, f x, d)`, for `d` read off each
/// section.
pub fn is_system_morphism<F>(
    f: F,
    a: &System,
    b: &System,
    sections: &[Section],
    times: &[Time],
    states: &[Point],
    tol: f64,
) -> Result<LawReport>
where
    F: Fn(&Point) -> Result<Point>,
{
    if a.interface() != b.interface() || !a.time().same_as(&b.time()) {
        return Err(Error::Shape("system morphisms need a shared interface and clock".into()));
    }
    let mut report = LawReport::new("system morphism", tol);
    for &t in times {
        for x in states {
            let fx = match f(x) {
                Ok(y) => y,
                Err(e) => {
                    report.record_error(format!("f({x})"), &e);
                    continue;
                }
            };
            let (oa, ob) = match (a.output(t, x), b.output(t, &fx)) {
                (Ok(oa), Ok(ob)) => (oa, ob),
                (Err(e), _) | (_, Err(e)) => {
                    report.record_error(format!("outputs at t={t}, {x}"), &e);
                    continue;
                }
            };
            if oa != ob {
                report.record(f64::INFINITY, || format!("t={t}: output {oa} at {x} but {ob} at {fx}"));
                continue;
            }
            report.record(0.0, String::new);
            for sigma in sections {
                let ctx = || format!("t={t}, state {x}, section {}", sigma.name());
                let lhs = sigma
                    .at(&oa)
                    .and_then(|d| a.update(t, x, &d))
                    .and_then(|law| try_pushforward(&f, &law));
                let rhs = sigma.at(&oa).and_then(|d| b.update(t, &fx, &d));
                match (lhs, rhs) {
                    (Ok(l), Ok(r)) => report.record(l.distance(&r), ctx),
                    (Err(e), _) | (_, Err(e)) => report.record_error(ctx(), &e),
                }
            }
        }
    }
    Ok(report)
}

/// Largest deviation between the one-step tables of two systems over the
/// same interface and states, at the given times.
fn table_gap(a: &System, b: &System, times: &[Time], report: &mut LawReport, law: &str) {
    let states = match a.states().enumerate() {
        Ok(s) => s,
        Err(e) => return report.record_error(law, &e),
    };
    if a.interface() != b.interface() {
        return report.record(f64::INFINITY, || format!("{law}: interfaces {} and {}", a.interface(), b.interface()));
    }
    for &t in times {
        for s in &states {
            let (oa, ob) = match (a.output(t, s), b.output(t, s)) {
                (Ok(x), Ok(y)) => (x, y),
                (Err(e), _) | (_, Err(e)) => {
                    report.record_error(format!("{law}: output at t={t}, {s}"), &e);
                    continue;
                }
            };
            if oa != ob {
                report.record(f64::INFINITY, || format!("{law}: t={t}, state {s}: output {oa} vs {ob}"));
                continue;
            }
            let dirs = match a.interface().directions_at(&oa).and_then(|d| d.enumerate()) {
                Ok(d) => d,
                Err(e) => {
                    report.record_error(format!("{law}: directions at {oa}"), &e);
                    continue;
                }
            };
            for d in dirs {
                let ctx = || format!("{law}: t={t}, state {s}, input {d}");
                match (a.update(t, s, &d), b.update(t, s, &d)) {
                    (Ok(x), Ok(y)) => report.record(x.distance(&y), ctx),
                    (Err(e), _) | (_, Err(e)) => report.record_error(ctx(), &e),
                }
            }
        }
    }
}

/// The opindexing laws on a finite system: `id_* = id`,
/// `(ψ ∘ φ)_* = ψ_* ∘ φ_*`, and closing `φ_* sys` by `τ` equals closing `sys`
/// by the pulled-back section `φ^* τ`, for every section `τ` of `φ`'s target.
pub fn check_opindexing(sys: &System, phi: &PolyMap, psi: &PolyMap, times: &[Time], tol: f64) -> Result<LawReport> {
    use crate::poly::{all_sections, compose_map, pull_section};
    let mut report = LawReport::new("opindexing", tol);
    let id = reindex(&PolyMap::identity(sys.interface()), sys)?;
    table_gap(&id, sys, times, &mut report, "identity");
    let lhs = reindex(&compose_map(psi, phi)?, sys)?;
    let rhs = reindex(psi, &reindex(phi, sys)?)?;
    table_gap(&lhs, &rhs, times, &mut report, "composition");
    let pushed = reindex(phi, sys)?;
    let states = sys.states().enumerate()?;
    for tau in all_sections(phi.target(), 4096)? {
        let a = pushed.closure(&tau)?;
        let b = sys.closure(&pull_section(phi, &tau)?)?;
        for &t in times {
            for s in &states {
                let ctx = || format!("closure: section {}, t={t}, state {s}", tau.name());
                match (a.step(t, s), b.step(t, s)) {
                    (Ok(x), Ok(y)) => report.record(x.distance(&y), ctx),
                    (Err(e), _) | (_, Err(e)) => report.record_error(ctx(), &e),
                }
            }
        }
    }
    Ok(report)
}
