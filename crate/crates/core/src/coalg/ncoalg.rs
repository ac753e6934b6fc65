//! The coalgebra presentation `S → Σᵢ S^{p[i]}` of a finite deterministic
//! discrete-time system.

use std::collections::BTreeMap;

use super::system::{Dynamics, System};
use crate::error::{Error, Result};
use crate::monad::Dist;
use crate::poly::{Effect, Point, Polynomial, Space, Time};

/// For each state, its position and the next state for every direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoalgebraTable {
    pub rows: BTreeMap<Point, (Point, BTreeMap<Point, Point>)>,
}

impl System {
    /// Tabulates the structure map `S → Σᵢ S^{p[i]}`.
    pub fn to_coalgebra(&self) -> Result<CoalgebraTable> {
        if !matches!(self.dynamics, Dynamics::Discrete { .. }) || self.effect != Effect::Deterministic {
            return Err(Error::Unsupported("coalgebra tables need a deterministic discrete-time system".into()));
        }
        let mut rows = BTreeMap::new();
        for s in self.states.enumerate()? {
            let i = self.output(Time(1), &s)?;
            let mut next = BTreeMap::new();
            for d in self.interface.directions_at(&i)?.enumerate()? {
                next.insert(d.clone(), self.update(Time(1), &s, &d)?.into_dirac("deterministic update")?);
            }
            rows.insert(s, (i, next));
        }
        Ok(CoalgebraTable { rows })
    }

    /// Rebuilds the system from its coalgebra table.
    pub fn from_coalgebra(interface: Polynomial, states: Space, table: CoalgebraTable) -> Result<System> {
        for s in states.enumerate()? {
            let (i, next) = table
                .rows
                .get(&s)
                .ok_or_else(|| Error::Shape(format!("coalgebra table has no row for {s}")))?;
            let dirs = interface.directions_at(i)?.enumerate()?;
            if dirs.len() != next.len() || dirs.iter().any(|d| !next.get(d).is_some_and(|x| states.contains(x))) {
                return Err(Error::Shape(format!("row for {s} is not a map {} -> {states}", interface.directions_at(i)?)));
            }
        }
        let rows = std::sync::Arc::new(table.rows);
        let r2 = rows.clone();
        Ok(System::discrete(
            interface,
            states,
            Effect::Deterministic,
            move |s| Ok(rows[s].0.clone()),
            move |s, d| Ok(Dist::Dirac(r2[s].1[d].clone())),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monad::Rng;

    fn random_system(seed: u64) -> System {
        let mut rng = Rng::seed(seed);
        let n = 1 + rng.below(5);
        let np = 1 + rng.below(3);
        let nd = 1 + rng.below(3);
        let out: Vec<usize> = (0..n).map(|_| rng.below(np)).collect();
        let next: Vec<Vec<usize>> = (0..n).map(|_| (0..nd).map(|_| rng.below(n)).collect()).collect();
        let p = Polynomial::monomial(Space::range(np), Space::range(nd));
        let idx = |x: &Point| x.as_label().unwrap().parse::<usize>().unwrap();
        System::deterministic(
            p,
            Space::range(n),
            move |s| Point::label(out[idx(s)].to_string()),
            move |s, d| Point::label(next[idx(s)][idx(d)].to_string()),
        )
    }

    #[test]
    fn round_trip_is_identity() {
        for seed in 0..20 {
            let sys = random_system(seed);
            let table = sys.to_coalgebra().unwrap();
            let back = System::from_coalgebra(sys.interface().clone(), sys.states().clone(), table.clone()).unwrap();
            assert_eq!(back.to_coalgebra().unwrap(), table);
        }
    }

    #[test]
    fn one_state_system() {
        let sys = System::deterministic(Polynomial::y(), Space::range(1), |_| Point::Unit, |s, _| s.clone());
        let t = sys.to_coalgebra().unwrap();
        assert_eq!(t.rows.len(), 1);
        let back = System::from_coalgebra(Polynomial::y(), Space::range(1), t.clone()).unwrap();
        assert_eq!(back.to_coalgebra().unwrap(), t);
    }

    #[test]
    fn stochastic_systems_have_no_table() {
        let s = Space::range(2);
        let m = System::markov(s.clone(), crate::monad::Kernel::new(|x| Ok(Dist::Dirac(x.clone()))));
        assert!(m.to_coalgebra().is_err());
    }
}
