//! Quasi-bisimulation: two systems are related when, for every section,
//! their traces agree from some (or every) choice of initial laws.

use std::fmt;

use serde::Serialize;

use crate::coalg::{trace, System, Trace};
use crate::error::{Error, Result};
use crate::monad::Dist;
use crate::poly::{Section, Space, Time};
use crate::report::LawReport;

use super::system::{HierSection, HierSystem};
use super::trace::{hier_trace_mode, TraceMode};

/// Largest state space whose Diracs are tried as candidate initial laws.
pub const DIRAC_CANDIDATE_LIMIT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantifier {
    Exists,
    ForAll,
}

impl fmt::Display for Quantifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantifier::Exists => "∃",
            Quantifier::ForAll => "∀",
        })
    }
}

/// Systems whose traces can be compared.
pub trait Traced {
    type Section;
    fn state_space(&self) -> &Space;
    fn intended_init(&self) -> Option<&Dist>;
    /// Normalized description of the interface, equal for comparable systems.
    fn interface_key(&self) -> String;
    fn trace_with(&self, sec: &Self::Section, init: &Dist, horizon: u64, mode: TraceMode) -> Result<Trace>;
    fn section_name(sec: &Self::Section) -> String;
}

impl Traced for HierSystem {
    type Section = HierSection;

    fn state_space(&self) -> &Space {
        self.states()
    }

    fn intended_init(&self) -> Option<&Dist> {
        self.init()
    }

    fn interface_key(&self) -> String {
        format!("[{}, {}]", self.source().normalized(), self.target().normalized())
    }

    fn trace_with(&self, sec: &HierSection, init: &Dist, horizon: u64, mode: TraceMode) -> Result<Trace> {
        hier_trace_mode(self, sec, init, horizon, mode)
    }

    fn section_name(sec: &HierSection) -> String {
        sec.name().to_string()
    }
}

impl Traced for System {
    type Section = Section;

    fn state_space(&self) -> &Space {
        self.states()
    }

    fn intended_init(&self) -> Option<&Dist> {
        None
    }

    fn interface_key(&self) -> String {
        self.interface().normalized().to_string()
    }

    fn trace_with(&self, sec: &Section, init: &Dist, horizon: u64, mode: TraceMode) -> Result<Trace> {
        if mode != TraceMode::Exact {
            return Err(Error::Unsupported("open systems are traced exactly".into()));
        }
        trace(self, sec, init, horizon)
    }

    fn section_name(sec: &Section) -> String {
        sec.name().to_string()
    }
}

#[derive(Debug, Clone)]
pub struct BisimOptions {
    pub alpha: Quantifier,
    pub beta: Quantifier,
    pub horizon: u64,
    pub tol: f64,
    pub mode: TraceMode,
    /// Extra initial laws to try for the first system.
    pub candidates_a: Vec<Dist>,
    /// Extra initial laws to try for the second system.
    pub candidates_b: Vec<Dist>,
}

impl Default for BisimOptions {
    fn default() -> Self {
        BisimOptions {
            alpha: Quantifier::Exists,
            beta: Quantifier::Exists,
            horizon: 4,
            tol: 1e-9,
            mode: TraceMode::Exact,
            candidates_a: Vec::new(),
            candidates_b: Vec::new(),
        }
    }
}

/// Where two traces are furthest apart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceWitness {
    pub section: String,
    pub time: Option<u64>,
    pub deviation: f64,
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub related: bool,
    pub alpha_mode: Quantifier,
    pub beta_mode: Quantifier,
    /// The decisive pair of initial laws: a relating pair when related, the
    /// closest failing pair otherwise.
    pub alpha: Option<Dist>,
    pub beta: Option<Dist>,
    pub deviation: f64,
    pub witness: Option<TraceWitness>,
    pub report: LawReport,
}

fn candidates(space: &Space, intended: Option<&Dist>, extra: &[Dist], q: Quantifier) -> Result<Vec<Dist>> {
    let mut out: Vec<Dist> = extra.to_vec();
    if let Some(init) = intended {
        out.push(init.clone());
    }
    match (space.cardinality(), q) {
        (Some(n), Quantifier::Exists) if n <= DIRAC_CANDIDATE_LIMIT => {
            let points = space.enumerate()?;
            out.extend(points.iter().cloned().map(Dist::Dirac));
            out.push(Dist::uniform(&points)?);
        }
        (Some(n), Quantifier::ForAll) if n <= super::trace::TABLE_LIMIT => {
            // traces are affine in the initial law, so Diracs cover the
            // finitely supported laws
            let points = space.enumerate()?;
            out.extend(points.iter().cloned().map(Dist::Dirac));
            out.push(Dist::uniform(&points)?);
        }
        (Some(n), Quantifier::Exists) => {
            let _ = n;
            if let Ok(points) = space.enumerate() {
                out.push(Dist::uniform(&points)?);
            }
        }
        (_, Quantifier::ForAll) => {
            return Err(Error::Unsupported(format!("universal quantification over initial laws on {space}")))
        }
        (None, Quantifier::Exists) => {}
    }
    if out.is_empty() {
        return Err(Error::Invalid(format!("no candidate initial laws on {space}")));
    }
    out.dedup();
    Ok(out)
}

/// Compares the traces of `a` and `b` under every section, with initial
/// laws quantified as in `opts`.
pub fn quasi_bisim<S: Traced>(a: &S, b: &S, sections: &[S::Section], opts: &BisimOptions) -> Result<Verdict> {
    if a.interface_key() != b.interface_key() {
        return Err(Error::Shape(format!(
            "systems over {} and {} cannot be compared",
            a.interface_key(),
            b.interface_key()
        )));
    }
    if sections.is_empty() {
        return Err(Error::Invalid("no sections to compare under".into()));
    }
    let cand_a = candidates(a.state_space(), a.intended_init(), &opts.candidates_a, opts.alpha)?;
    let cand_b = candidates(b.state_space(), b.intended_init(), &opts.candidates_b, opts.beta)?;
    let traces = |sys: &S, cands: &[Dist]| -> Result<Vec<Vec<Trace>>> {
        cands
            .iter()
            .map(|init| sections.iter().map(|s| sys.trace_with(s, init, opts.horizon, opts.mode)).collect())
            .collect()
    };
    let ta = traces(a, &cand_a)?;
    let tb = traces(b, &cand_b)?;

    // deviation of one pair, with the section and time where it is largest
    let pair = |k: usize, m: usize| -> (f64, TraceWitness) {
        let mut worst = TraceWitness { section: S::section_name(&sections[0]), time: None, deviation: 0.0 };
        for (s, sec) in sections.iter().enumerate() {
            let (d, t) = ta[k][s].distance(&tb[m][s]);
            let d = if d.is_nan() { f64::INFINITY } else { d };
            if d > worst.deviation {
                worst = TraceWitness { section: S::section_name(sec), time: t.map(|Time(t)| t), deviation: d };
            }
        }
        (worst.deviation, worst)
    };
    let pick = |q: Quantifier, x: f64, y: f64| match q {
        Quantifier::Exists => x < y,
        Quantifier::ForAll => x > y,
    };

    let mut best: Option<(f64, usize, usize, TraceWitness)> = None;
    for k in 0..cand_a.len() {
        let mut inner: Option<(f64, usize, TraceWitness)> = None;
        for m in 0..cand_b.len() {
            let (d, w) = pair(k, m);
            if inner.as_ref().is_none_or(|(cur, _, _)| pick(opts.beta, d, *cur)) {
                inner = Some((d, m, w));
            }
        }
        let (d, m, w) = inner.expect("non-empty candidates");
        if best.as_ref().is_none_or(|(cur, _, _, _)| pick(opts.alpha, d, *cur)) {
            best = Some((d, k, m, w));
        }
    }
    let (deviation, k, m, w) = best.expect("non-empty candidates");
    let mut report = LawReport::new(format!("quasi-bisimulation ({}α {}β)", opts.alpha, opts.beta), opts.tol);
    report.record(deviation, || match w.time {
        Some(t) => format!("section {} at t={t}", w.section),
        None => format!("section {}", w.section),
    });
    Ok(Verdict {
        related: report.passed,
        alpha_mode: opts.alpha,
        beta_mode: opts.beta,
        alpha: Some(cand_a[k].clone()),
        beta: Some(cand_b[m].clone()),
        deviation,
        witness: (deviation > 0.0).then_some(w),
        report,
    })
}
