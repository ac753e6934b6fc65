//! Traces of hierarchical systems: the law of the emitted morphism over
//! time when the system is driven by a section of `[p, q]`.

use crate::coalg::Trace;
use crate::error::{Error, Result};
use crate::monad::{try_pushforward, Dist, Kernel};
use crate::poly::{Point, PolyMap, Time};

use super::system::{HierSection, HierSystem};

/// Largest table (positions × directions) observed in full.
pub const TABLE_LIMIT: usize = 4096;

/// How state laws are carried from one step to the next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceMode {
    /// Exact laws; needs finitely supported states or Dirac laws.
    #[default]
    Exact,
    /// Each law is replaced by the Dirac at its mean before it is used.
    MeanSkeleton,
}

/// A law encoded as a point, so that stochastic backward maps can be
/// observed.
pub fn dist_point(d: &Dist) -> Point {
    match d {
        Dist::Dirac(p) => p.clone(),
        Dist::Categorical(_) => Point::Tuple(
            d.atoms()
                .expect("finite")
                .into_iter()
                .map(|(p, w)| Point::pair(p, Point::scalar(w)))
                .collect(),
        ),
        Dist::Gaussian(g) => Point::Tuple(vec![
            Point::label("gaussian"),
            Point::vector(g.mean().as_slice().to_vec()),
            Point::vector(g.cov().as_slice().to_vec()),
        ]),
    }
}

/// The full table of a morphism with finitely many positions and
/// directions: for each position `i`, `(f₁ i, [f^#(i, d′) for d′])`.
pub fn table_fingerprint(f: &PolyMap) -> Result<Point> {
    if f.source().positions().cardinality().is_none_or(|n| n > TABLE_LIMIT) {
        return Err(Error::NotEnumerable(format!("positions of {}", f.source())));
    }
    let positions = f.source().positions().enumerate()?;
    let mut size = 0usize;
    let mut rows = Vec::with_capacity(positions.len());
    for i in positions {
        let j = f.forward(&i)?;
        let dirs = f.target().directions_at(&j)?.enumerate()?;
        size += dirs.len().max(1);
        if size > TABLE_LIMIT {
            return Err(Error::NotEnumerable(format!("table of {} -> {} exceeds {TABLE_LIMIT} entries", f.source(), f.target())));
        }
        let back = dirs
            .iter()
            .map(|d| f.backward(&i, d).map(|law| dist_point(&law)))
            .collect::<Result<Vec<_>>>()?;
        rows.push(Point::pair(j, Point::Tuple(back)));
    }
    Ok(Point::Tuple(rows))
}

/// What is observed of an emitted morphism: its full table when finite,
/// otherwise its values at the input chosen by the section.
pub fn fingerprint(f: &PolyMap, sec: &HierSection) -> Result<Point> {
    match table_fingerprint(f) {
        Ok(table) => Ok(table),
        Err(Error::NotEnumerable(_)) => {
            let (i, d) = sec.choose(f)?;
            let j = f.forward(&i)?;
            let back = dist_point(&f.backward(&i, &d)?);
            Ok(Point::Tuple(vec![i, j, back]))
        }
        Err(e) => Err(e),
    }
}

fn carry(law: Dist, mode: TraceMode) -> Dist {
    match mode {
        TraceMode::Exact => law,
        TraceMode::MeanSkeleton => law.mean_skeleton(),
    }
}

/// State laws at times `0..=horizon` of the system closed by `sec`.
pub fn run_states(sys: &HierSystem, sec: &HierSection, init: &Dist, horizon: u64, mode: TraceMode) -> Result<Vec<Dist>> {
    if !init.is_over(sys.states()) {
        return Err(Error::IllTyped(format!("initial law is not over {}", sys.states())));
    }
    let (s, c) = (sys.clone(), sec.clone());
    let step = Kernel::new(move |x| {
        let f = s.emit(x)?;
        let (i, d) = c.choose(&f)?;
        s.absorb(x, &i, &d)
    });
    let mut laws = vec![carry(init.clone(), mode)];
    for _ in 0..horizon {
        let next = step.extend(laws.last().expect("non-empty"))?;
        laws.push(carry(next, mode));
    }
    Ok(laws)
}

/// `tr(β, σ)` in the given mode.
pub fn hier_trace_mode(sys: &HierSystem, sec: &HierSection, init: &Dist, horizon: u64, mode: TraceMode) -> Result<Trace> {
    let laws = run_states(sys, sec, init, horizon, mode)?;
    let values = laws
        .iter()
        .map(|law| try_pushforward(|x| fingerprint(&sys.emit(x)?, sec), law))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trace { times: (0..=horizon).map(Time).collect(), values })
}

/// Exact `tr(β, σ)`.
pub fn hier_trace(sys: &HierSystem, sec: &HierSection, init: &Dist, horizon: u64) -> Result<Trace> {
    hier_trace_mode(sys, sec, init, horizon, TraceMode::Exact)
}
