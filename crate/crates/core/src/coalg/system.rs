//! Open dynamical systems over a polynomial interface.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::monad::{Dist, Kernel};
use crate::poly::{Effect, Point, Polynomial, Space, Time, TimeMonoid};

pub(crate) type OutputFn = dyn Fn(&Point) -> Result<Point> + Send + Sync;
pub(crate) type UpdateFn = dyn Fn(&Point, &Point) -> Result<Dist> + Send + Sync;
pub(crate) type TimedOutputFn = dyn Fn(Time, &Point) -> Result<Point> + Send + Sync;
pub(crate) type TimedUpdateFn = dyn Fn(Time, &Point, &Point) -> Result<Dist> + Send + Sync;
pub(crate) type FieldFn = dyn Fn(&DVector<f64>, &Point) -> Result<DVector<f64>> + Send + Sync;

/// How the output and update maps depend on time.
#[derive(Clone)]
pub enum Dynamics {
    /// Discrete time given by its `t = 1` components. The closure at `t` is
    /// the `t`-fold Kleisli iterate of the one-step closure.
    Discrete { output: Arc<OutputFn>, update: Arc<UpdateFn> },
    /// Output and update given explicitly at every time. The closure at `t`
    /// is `update(t, s, σ(output(t, s)))`, so the flow law is a property to
    /// check rather than a consequence of the construction.
    TimeIndexed { output: Arc<TimedOutputFn>, update: Arc<TimedUpdateFn> },
    /// A vector field `ẋ = f(x, d)` on `R^n`, integrated by classical RK4 with
    /// step `h`. Inputs are held fixed over each step.
    VectorField { output: Arc<OutputFn>, field: Arc<FieldFn>, h: f64 },
}

impl fmt::Debug for Dynamics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dynamics::Discrete { .. } => write!(f, "Discrete"),
            Dynamics::TimeIndexed { .. } => write!(f, "TimeIndexed"),
            Dynamics::VectorField { h, .. } => write!(f, "VectorField(h = {h})"),
        }
    }
}

/// An open system: states, an interface `p`, an output map into the
/// positions of `p` and an update map from the directions at the current
/// output back into (distributions on) states.
#[derive(Clone, Debug)]
pub struct System {
    pub(crate) interface: Polynomial,
    pub(crate) states: Space,
    pub(crate) time: TimeMonoid,
    pub(crate) effect: Effect,
    pub(crate) dynamics: Dynamics,
}

impl System {
    /// A discrete-time system from its one-step output and update.
    pub fn discrete<O, U>(interface: Polynomial, states: Space, effect: Effect, output: O, update: U) -> System
    where
        O: Fn(&Point) -> Result<Point> + Send + Sync + 'static,
        U: Fn(&Point, &Point) -> Result<Dist> + Send + Sync + 'static,
    {
        System {
            interface,
            states,
            time: TimeMonoid::DiscreteNat,
            effect,
            dynamics: Dynamics::Discrete { output: Arc::new(output), update: Arc::new(update) },
        }
    }

    /// A deterministic discrete-time system from plain functions.
    pub fn deterministic<O, U>(interface: Polynomial, states: Space, output: O, update: U) -> System
    where
        O: Fn(&Point) -> Point + Send + Sync + 'static,
        U: Fn(&Point, &Point) -> Point + Send + Sync + 'static,
    {
        System::discrete(
            interface,
            states,
            Effect::Deterministic,
            move |s| Ok(output(s)),
            move |s, d| Ok(Dist::Dirac(update(s, d))),
        )
    }

    /// A closed Markov chain on `states`, as a system over `y`.
    pub fn markov(states: Space, kernel: Kernel) -> System {
        System::discrete(
            Polynomial::y(),
            states,
            Effect::Stochastic,
            |_| Ok(Point::Unit),
            move |s, _| kernel.apply(s),
        )
    }

    /// A system whose maps are given at every time.
    pub fn time_indexed<O, U>(
        interface: Polynomial,
        states: Space,
        time: TimeMonoid,
        effect: Effect,
        output: O,
        update: U,
    ) -> System
    where
        O: Fn(Time, &Point) -> Result<Point> + Send + Sync + 'static,
        U: Fn(Time, &Point, &Point) -> Result<Dist> + Send + Sync + 'static,
    {
        System {
            interface,
            states,
            time,
            effect,
            dynamics: Dynamics::TimeIndexed { output: Arc::new(output), update: Arc::new(update) },
        }
    }

    pub fn interface(&self) -> &Polynomial {
        &self.interface
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

    pub fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    /// `β^o(t, s)`.
    pub fn output(&self, t: Time, s: &Point) -> Result<Point> {
        self.states.check(s, "state")?;
        let i = match &self.dynamics {
            Dynamics::Discrete { output, .. } | Dynamics::VectorField { output, .. } => output(s)?,
            Dynamics::TimeIndexed { output, .. } => output(t, s)?,
        };
        self.interface.positions().check(&i, "output position")?;
        Ok(i)
    }

    /// `β^u(t, s, d)` for `d ∈ p[β^o(t, s)]`.
    ///
    /// A discrete system uses its one-step update for every `t ≥ 1`. A vector
    /// field integrates for time `t` holding `d` fixed. At `t = 0` every
    /// system stays put.
    pub fn update(&self, t: Time, s: &Point, d: &Point) -> Result<Dist> {
        let i = self.output(t, s)?;
        self.interface.directions_at(&i)?.check(d, "input direction")?;
        if t == Time::ZERO {
            return Ok(Dist::Dirac(s.clone()));
        }
        let next = match &self.dynamics {
            Dynamics::Discrete { update, .. } => update(s, d)?,
            Dynamics::TimeIndexed { update, .. } => update(t, s, d)?,
            Dynamics::VectorField { field, h, .. } => {
                let mut x = super::field::state_vector(&self.states, s)?;
                for _ in 0..t.ticks() {
                    x = super::field::rk4_step(field.as_ref(), &x, d, *h)?;
                }
                Dist::Dirac(Point::from_reals(&self.states, x.as_slice())?)
            }
        };
        self.check_update(s, next)
    }

    pub(crate) fn check_update(&self, s: &Point, next: Dist) -> Result<Dist> {
        if !next.is_over(&self.states) {
            return Err(Error::IllTyped(format!("update from {s} left the state space {}", self.states)));
        }
        if self.effect == Effect::Deterministic && !next.is_dirac() {
            return Err(Error::NotDeterministic(format!("update from {s} returned a {}", next.kind_name())));
        }
        Ok(next)
    }

    /// Type-checks output and update at every state of a finite system, for
    /// every direction at `t = 1`.
    pub fn validate(&self) -> Result<()> {
        for s in self.states.enumerate()? {
            let i = self.output(Time(1), &s)?;
            for d in self.interface.directions_at(&i)?.enumerate()? {
                self.update(Time(1), &s, &d)?;
            }
        }
        Ok(())
    }
}
