//! Time monoids. Times are held as whole ticks so that monoid arithmetic is
//! exact; a continuous clock interprets a tick as a step of length `h`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An element of a time monoid, as a number of ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Time(pub u64);

impl Time {
    pub const ZERO: Time = Time(0);

    pub fn ticks(self) -> u64 {
        self.0
    }
}

impl std::ops::Add for Time {
    type Output = Time;
    fn add(self, other: Time) -> Time {
        Time(self.0 + other.0)
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeMonoid {
    /// `(ℕ, +, 0)`.
    DiscreteNat,
    /// `(ℝ≥0, +, 0)` sampled on the grid `h ℕ`.
    RealNonNeg { h: f64 },
}

impl TimeMonoid {
    pub fn real(h: f64) -> Result<TimeMonoid> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Invalid(format!("clock step must be positive, got {h}")));
        }
        Ok(TimeMonoid::RealNonNeg { h })
    }

    pub fn step(&self) -> f64 {
        match self {
            TimeMonoid::DiscreteNat => 1.0,
            TimeMonoid::RealNonNeg { h } => *h,
        }
    }

    /// The real duration of `t`.
    pub fn to_real(&self, t: Time) -> f64 {
        t.0 as f64 * self.step()
    }

    /// The tick count of a real duration; it must sit on the grid up to a
    /// relative error of `1e-9`.
    pub fn from_real(&self, x: f64) -> Result<Time> {
        if !(x.is_finite() && x >= 0.0) {
            return Err(Error::OffGrid(x));
        }
        let n = (x / self.step()).round();
        if (n * self.step() - x).abs() > 1e-9 * x.abs().max(self.step()) {
            return Err(Error::OffGrid(x));
        }
        Ok(Time(n as u64))
    }

    pub fn same_as(&self, other: &TimeMonoid) -> bool {
        match (self, other) {
            (TimeMonoid::DiscreteNat, TimeMonoid::DiscreteNat) => true,
            (TimeMonoid::RealNonNeg { h: a }, TimeMonoid::RealNonNeg { h: b }) => a == b,
            _ => false,
        }
    }
}
