//! Law suites run by `check`.

use serde::Deserialize;

use super::catalog;
use crate::coalg::{check_flow, check_opindexing, pairs_up_to, SystemSpec};
use crate::error::{Error, Result};
use crate::hier::{bayes_check, comonoid_law_systems, exact_bayes, linear_sections, perturb_channel, quasi_bisim, BisimOptions};
use crate::monad::{Dist, FiniteKernel};
use crate::poly::{all_sections, Point, Space, Time};
use crate::random_bundle::{
    check_bundle, check_measure_preserving, check_random_system, rebase_bundle, rebase_rds, reindex_bundle, reindex_rds,
    MeasurePreservingSystem,
};
use crate::report::{LawReport, SuiteReport};

pub const SUITES: &[&str] = &["flow", "measure", "rds", "bundle", "comonoid", "bayes", "opindex"];

fn failed(law: &str, tol: f64, e: &Error) -> LawReport {
    let mut r = LawReport::new(law, tol);
    r.record_error(law, e);
    r
}

/// `β^σ(s + t) = β^σ(s) ∘ β^σ(t)` for every listed section and `s + t ≤
/// horizon`, from every state (or the initial law's support).
pub fn flow_suite(spec: &SystemSpec, horizon: u64, tol: f64) -> Result<SuiteReport> {
    let states = match spec.system.states().enumerate() {
        Ok(s) => s,
        Err(_) => match &spec.init {
            Some(d) => d.atoms().map(|a| a.into_iter().map(|(p, _)| p).collect()).unwrap_or_else(|| vec![d.mean_point().expect("real law")]),
            None => return Err(Error::Invalid("infinite state space needs an \"init\" to check from".into())),
        },
    };
    let report = check_flow(&spec.system, &spec.sections, &pairs_up_to(horizon), &states, tol);
    Ok(SuiteReport::new(format!("flow ({})", spec.name), vec![report]))
}

pub fn measure_suite(name: &str, mp: &MeasurePreservingSystem) -> SuiteReport {
    let gens: Vec<Time> = (1..=3).map(Time).collect();
    SuiteReport::new(format!("measure ({name})"), vec![check_measure_preserving(mp, &gens)])
}

pub fn rds_suite() -> Result<SuiteReport> {
    let rds = catalog::skew_product_example()?;
    let times: Vec<Time> = (0..=4).map(Time).collect();
    let p = rds.system().interface().clone();
    let mut laws = vec![check_random_system(&rds, &all_sections(&p, 4096)?, &times)];
    laws.push(match reindex_rds(&catalog::skew_relabel(&p)?, &rds) {
        Ok(moved) => {
            let mut r = check_random_system(&moved, &all_sections(moved.system().interface(), 4096)?, &times);
            r.law = "random system square after reindexing".into();
            r
        }
        Err(e) => failed("random system square after reindexing", 0.0, &e),
    });
    laws.push(match rebase_rds(&catalog::noise_quotient(&rds)?, &rds) {
        Ok(moved) => {
            let mut r = check_random_system(&moved, &all_sections(&p, 4096)?, &times);
            r.law = "random system square after rebasing".into();
            r
        }
        Err(e) => failed("random system square after rebasing", 0.0, &e),
    });
    Ok(SuiteReport::new("rds", laws))
}

pub fn bundle_suite() -> Result<SuiteReport> {
    let bs = catalog::bundle_example()?;
    let times: Vec<Time> = (0..=4).map(Time).collect();
    let square = |b: &crate::random_bundle::BundleSystem, law: &str| -> Result<LawReport> {
        let sp = all_sections(b.total().interface(), 4096)?;
        let sb = all_sections(b.base().interface(), 4096)?;
        let mut r = check_bundle(b, &sp, &sb, &times);
        r.law = law.into();
        Ok(r)
    };
    let mut laws = vec![square(&bs, "bundle double-section square")?];
    let p = bs.total().interface().clone();
    let relabel = crate::poly::PolyMap::lens(
        p,
        crate::poly::Polynomial::monomial(Space::finite(["u", "v"])?, Space::range(3)),
        |i| Point::label(if i == &Point::label("B0") { "v" } else { "u" }),
        |_, d| Point::label(if d == &Point::label("2") { "1" } else { "0" }),
    );
    laws.push(match reindex_bundle(&relabel, &bs) {
        Ok(moved) => square(&moved, "bundle square after reindexing")?,
        Err(e) => failed("bundle square after reindexing", 0.0, &e),
    });
    let (rho, phi) = catalog::bundle_relabel(&bs);
    laws.push(match rebase_bundle(phi, &rho, &bs) {
        Ok(moved) => square(&moved, "bundle square after rebasing")?,
        Err(e) => failed("bundle square after rebasing", 0.0, &e),
    });
    Ok(SuiteReport::new("bundle", laws))
}

/// Counit, coassociativity and cocommutativity of copy/discard on `space`.
pub fn comonoid_suite(space: &Space, horizon: u64, tol: f64) -> Result<SuiteReport> {
    let mut laws = Vec::new();
    for (law, lhs, rhs) in comonoid_law_systems(space)? {
        let secs = linear_sections(lhs.source(), 4)?;
        let v = quasi_bisim(&lhs, &rhs, &secs, &BisimOptions { horizon, tol, ..Default::default() })?;
        let mut r = v.report;
        r.law = law.into();
        laws.push(r);
    }
    Ok(SuiteReport::new(format!("comonoid ({space})"), laws))
}

/// A finite channel, prior, and optionally a perturbation of the exact
/// inverse to check instead.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BayesSpec {
    #[serde(default)]
    pub kind: Option<String>,
    #[serde(default)]
    pub name: Option<String>,
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub channel: Vec<Vec<f64>>,
    pub prior: Vec<f64>,
    #[serde(default)]
    pub perturb: Option<f64>,
}

impl BayesSpec {
    pub fn parts(&self) -> Result<(FiniteKernel, Dist)> {
        let (xs, ys) = (Space::finite(self.x.clone())?, Space::finite(self.y.clone())?);
        let c = FiniteKernel::from_matrix(xs.clone(), ys, &self.channel)?;
        if self.prior.len() != self.x.len() {
            return Err(Error::Shape(format!("prior of length {} over {} inputs", self.prior.len(), self.x.len())));
        }
        let prior = Dist::categorical(xs.enumerate()?.into_iter().zip(self.prior.iter().copied()))?;
        Ok((c, prior))
    }
}

pub fn bayes_suite(spec: &BayesSpec, horizon: u64, tol: f64) -> Result<SuiteReport> {
    let (c, prior) = spec.parts()?;
    let inv = exact_bayes(&c, &prior)?;
    let candidate = match spec.perturb {
        Some(eps) => perturb_channel(&inv.kernel, eps)?,
        None => inv.kernel.clone(),
    };
    let v = bayes_check(&c, &prior, &candidate, horizon, tol)?;
    let mut r = v.report;
    if !inv.zero_evidence.is_empty() {
        let flagged: Vec<String> = inv.zero_evidence.iter().map(ToString::to_string).collect();
        r.law = format!("{} (zero evidence at {})", r.law, flagged.join(", "));
    }
    let name = spec.name.clone().unwrap_or_else(|| "bayes".into());
    Ok(SuiteReport::new(format!("bayes ({name})"), vec![r]))
}

pub fn opindex_suite(tol: f64) -> Result<SuiteReport> {
    let (sys, phi, psi) = catalog::opindex_example()?;
    let times: Vec<Time> = (0..=4).map(Time).collect();
    Ok(SuiteReport::new("opindex", vec![check_opindexing(&sys, &phi, &psi, &times, tol)?]))
}
