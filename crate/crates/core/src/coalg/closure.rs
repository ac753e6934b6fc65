//! Closed systems, closures of open systems by sections, the flow-law
//! check, and traces.

use std::fmt;
use std::sync::Arc;

use super::field::{rk4_step, state_vector};
use super::system::{Dynamics, System};
use crate::error::{Error, Result};
use crate::monad::{try_pushforward, Dist, Kernel, Rng};
use crate::poly::{Effect, Point, Section, Space, Time, TimeMonoid};
use crate::report::LawReport;

type StepFn = dyn Fn(Time, &Point) -> Result<Dist> + Send + Sync;

/// A (Kleisli) action of a time monoid on a state space.
#[derive(Clone)]
pub struct ClosedSystem {
    states: Space,
    time: TimeMonoid,
    effect: Effect,
    step: Arc<StepFn>,
    /// `step(t)` is the `t`-fold iterate of `step(1)` by construction.
    iterated: bool,
}

impl fmt::Debug for ClosedSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ClosedSystem(on {}, {:?})", self.states, self.time)
    }
}

impl ClosedSystem {
    /// A closed system from an explicit step map. `step(0)` must be the
    /// identity; that and the flow law are for [`check_closed_flow`] to
    /// confirm.
    pub fn new<F>(states: Space, time: TimeMonoid, effect: Effect, step: F) -> ClosedSystem
    where
        F: Fn(Time, &Point) -> Result<Dist> + Send + Sync + 'static,
    {
        ClosedSystem { states, time, effect, step: Arc::new(step), iterated: false }
    }

    /// The discrete-time action generated by a single step.
    pub fn generated<F>(states: Space, effect: Effect, one: F) -> ClosedSystem
    where
        F: Fn(&Point) -> Result<Dist> + Send + Sync + 'static,
    {
        let one = Kernel::new(one);
        ClosedSystem {
            states,
            time: TimeMonoid::DiscreteNat,
            effect,
            step: Arc::new(move |t, s| {
                let mut d = Dist::Dirac(s.clone());
                for _ in 0..t.ticks() {
                    d = one.extend(&d)?;
                }
                Ok(d)
            }),
            iterated: true,
        }
    }

    pub fn states(&self) -> &Space {
        &self.states
    }

    pub fn time(&self) -> TimeMonoid {
        self.time
    }

    pub fn effect(&self) -> Effect {
        self.effect
    }

    /// `ϑ(t)(s)`.
    pub fn step(&self, t: Time, s: &Point) -> Result<Dist> {
        self.states.check(s, "state")?;
        let out = (self.step)(t, s)?;
        if !out.is_over(&self.states) {
            return Err(Error::IllTyped(format!("step from {s} left {}", self.states)));
        }
        Ok(out)
    }

    /// `ϑ(t)` as a kernel.
    pub fn kernel(&self, t: Time) -> Kernel {
        let me = self.clone();
        Kernel::new(move |s| me.step(t, s))
    }

    /// `ϑ(t)` extended to distributions.
    pub fn extend(&self, t: Time, d: &Dist) -> Result<Dist> {
        self.kernel(t).extend(d)
    }

    /// State laws at times `0..=horizon` from `init`.
    pub fn laws(&self, init: &Dist, horizon: u64) -> Result<Vec<Dist>> {
        let mut out = vec![init.clone()];
        for t in 1..=horizon {
            let next = if self.iterated {
                self.extend(Time(1), out.last().unwrap())?
            } else {
                self.extend(Time(t), init)?
            };
            out.push(next);
        }
        Ok(out)
    }

    /// `ψ ∘ ϑ(t)` for a deterministic map of states.
    pub fn map_states<F>(&self, states: Space, f: F) -> ClosedSystem
    where
        F: Fn(&Point) -> Result<Point> + Send + Sync + 'static,
    {
        let me = self.clone();
        let f = Arc::new(f);
        ClosedSystem {
            states,
            time: self.time,
            effect: self.effect,
            step: Arc::new(move |t, s| {
                let f = f.clone();
                try_pushforward(move |p| f(p), &me.step(t, s)?)
            }),
            iterated: false,
        }
    }
}

impl System {
    /// The closure `β^σ` of the system by a section of its interface:
    /// `β^σ(t) = β^u ∘ β^o(t)*σ`.
    ///
    /// Discrete systems close to the action generated by one step. Vector
    /// fields re-read the section at the start of every RK4 step, so the
    /// input is held only over `[kh, (k+1)h)`.
    pub fn closure(&self, sigma: &Section) -> Result<ClosedSystem> {
        if sigma.of() != self.interface() {
            return Err(Error::Shape(format!(
                "section of {} used to close a system over {}",
                sigma.of(),
                self.interface()
            )));
        }
        let sys = self.clone();
        let sigma = sigma.clone();
        Ok(match &self.dynamics {
            Dynamics::Discrete { .. } => ClosedSystem::generated(self.states.clone(), self.effect, move |s| {
                let d = sigma.at(&sys.output(Time(1), s)?)?;
                sys.update(Time(1), s, &d)
            }),
            Dynamics::TimeIndexed { .. } => {
                ClosedSystem::new(self.states.clone(), self.time, self.effect, move |t, s| {
                    let d = sigma.at(&sys.output(t, s)?)?;
                    sys.update(t, s, &d)
                })
            }
            Dynamics::VectorField { output, field, h } => {
                let (output, field, h) = (output.clone(), field.clone(), *h);
                let states = self.states.clone();
                ClosedSystem::new(self.states.clone(), self.time, Effect::Deterministic, move |t, s| {
                    let mut x = state_vector(&states, s)?;
                    for _ in 0..t.ticks() {
                        let here = Point::from_reals(&states, x.as_slice())?;
                        let d = sigma.at(&output(&here)?)?;
                        x = rk4_step(field.as_ref(), &x, &d, h)?;
                    }
                    Ok(Dist::Dirac(Point::from_reals(&states, x.as_slice())?))
                })
            }
        })
    }
}

/// Checks `ϑ(0) = id` and `ϑ(s + t) = ϑ(s) ∘K ϑ(t)` at the given states.
pub fn check_closed_flow(cl: &ClosedSystem, pairs: &[(Time, Time)], states: &[Point], tol: f64) -> LawReport {
    let mut report = LawReport::new("flow", tol);
    for x in states {
        match cl.step(Time::ZERO, x) {
            Ok(d) => report.record(d.distance(&Dist::Dirac(x.clone())), || format!("step(0) at {x}")),
            Err(e) => report.record_error(format!("step(0) at {x}"), &e),
        }
    }
    for &(s, t) in pairs {
        for x in states {
            let ctx = || format!("s={s}, t={t}, state {x}");
            let lhs = cl.step(s + t, x);
            let rhs = cl.step(t, x).and_then(|d| cl.extend(s, &d));
            match (lhs, rhs) {
                (Ok(a), Ok(b)) => report.record(a.distance(&b), ctx),
                (Err(e), _) | (_, Err(e)) => report.record_error(ctx(), &e),
            }
        }
    }
    report
}

/// The flow law of every closure `β^σ`, `σ` ranging over `sections`.
pub fn check_flow(sys: &System, sections: &[Section], pairs: &[(Time, Time)], states: &[Point], tol: f64) -> LawReport {
    let mut report = LawReport::new("flow", tol);
    for sigma in sections {
        let mut part = match sys.closure(sigma) {
            Ok(cl) => check_closed_flow(&cl, pairs, states, tol),
            Err(e) => {
                let mut r = LawReport::new("flow", tol);
                r.record_error("closure", &e);
                r
            }
        };
        for w in &mut part.witnesses {
            w.context = format!("section {}: {}", sigma.name(), w.context);
        }
        report.merge(part);
    }
    report
}

/// All pairs `(s, t)` with `s + t ≤ max`.
pub fn pairs_up_to(max: u64) -> Vec<(Time, Time)> {
    (0..=max).flat_map(|s| (0..=max - s).map(move |t| (Time(s), Time(t)))).collect()
}

/// Per-time distribution of observed positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub times: Vec<Time>,
    pub values: Vec<Dist>,
}

impl Trace {
    /// Largest per-time distance between two traces of equal length, after
    /// normalizing product structure in the observed points.
    pub fn distance(&self, other: &Trace) -> (f64, Option<Time>) {
        if self.times != other.times {
            return (f64::INFINITY, None);
        }
        let mut worst = (0.0, None);
        for ((t, a), b) in self.times.iter().zip(&self.values).zip(&other.values) {
            let d = a.normalized_points().distance(&b.normalized_points());
            if d > worst.0 || (d.is_nan() && worst.1.is_none()) {
                worst = (d, Some(*t));
            }
        }
        worst
    }
}

/// `tr(β, σ)`: the law of the output at times `0..=horizon` when the closure
/// by `σ` starts from `init`. Exact by enumeration.
pub fn trace(sys: &System, sigma: &Section, init: &Dist, horizon: u64) -> Result<Trace> {
    let cl = sys.closure(sigma)?;
    let laws = cl.laws(init, horizon)?;
    let values = laws
        .iter()
        .enumerate()
        .map(|(t, law)| try_pushforward(|s| sys.output(Time(t as u64), s), law))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trace { times: (0..=horizon).map(Time).collect(), values })
}

/// Monte-Carlo trace from `n` sampled trajectories, for systems whose state
/// laws have no exact form.
pub fn trace_sampled(sys: &System, sigma: &Section, init: &Dist, horizon: u64, n: usize, rng: &mut Rng) -> Result<Trace> {
    if n == 0 {
        return Err(Error::Invalid("sampled trace with zero trajectories".into()));
    }
    let cl = sys.closure(sigma)?;
    let mut hits: Vec<Vec<(Point, f64)>> = vec![Vec::with_capacity(n); horizon as usize + 1];
    let w = 1.0 / n as f64;
    for _ in 0..n {
        let mut s = init.sample(rng);
        for (t, row) in hits.iter_mut().enumerate() {
            if t > 0 {
                s = cl.step(Time(1), &s)?.sample(rng);
            }
            row.push((sys.output(Time(t as u64), &s)?, w));
        }
    }
    let values = hits
        .into_iter()
        .map(|row| crate::monad::Categorical::normalized(row).map(Dist::from_categorical))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trace { times: (0..=horizon).map(Time).collect(), values })
}
