//! Exact Bayesian inversion of finite channels, and the check that an
//! inverse satisfies the joint-law equation
//! `(id_X ⊗ c) ∘ copy_X ∘ π = (c† ⊗ id_Y) ∘ copy_Y ∘ c ∘ π`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::monad::{Dist, FiniteKernel};
use crate::poly::{Point, Polynomial};

use super::bisim::{quasi_bisim, BisimOptions, Verdict};
use super::comonoid::copy_system;
use super::compose::{compose_chain, tensor_hier};
use super::system::{id_hier, HierSection, HierSystem};

/// Evidence below which an observation counts as impossible under the prior.
pub const EVIDENCE_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct BayesInverse {
    /// `c†_π : Y → 𝒫X`.
    pub kernel: FiniteKernel,
    /// Observations with zero evidence, mapped to the uniform law.
    pub zero_evidence: Vec<Point>,
}

/// `c†_π(x | y) = π(x) c(y | x) / Σₓ′ π(x′) c(y | x′)`.
pub fn exact_bayes(c: &FiniteKernel, prior: &Dist) -> Result<BayesInverse> {
    let xs = c.domain.enumerate()?;
    let ys = c.codomain.enumerate()?;
    if prior.atoms().is_none() || !prior.is_over(&c.domain) {
        return Err(Error::IllTyped(format!("prior is not a finite law over {}", c.domain)));
    }
    let mut rows = BTreeMap::new();
    let mut zero_evidence = Vec::new();
    for y in &ys {
        let joint: Vec<f64> = xs.iter().map(|x| Ok(prior.weight(x) * c.row(x)?.weight(y))).collect::<Result<_>>()?;
        let evidence: f64 = joint.iter().sum();
        let row = if evidence <= EVIDENCE_FLOOR {
            zero_evidence.push(y.clone());
            Dist::uniform(&xs)?
        } else {
            Dist::categorical(xs.iter().cloned().zip(joint.iter().map(|j| j / evidence)))?
        };
        rows.insert(y.clone(), row);
    }
    Ok(BayesInverse { kernel: FiniteKernel::new(c.codomain.clone(), c.domain.clone(), rows)?, zero_evidence })
}

/// Moves `eps` of mass in every row from its heaviest atom to the next
/// codomain point (cyclically).
pub fn perturb_channel(c: &FiniteKernel, eps: f64) -> Result<FiniteKernel> {
    let ys = c.codomain.enumerate()?;
    if ys.len() < 2 {
        return Err(Error::Invalid("a channel into a single point cannot be perturbed".into()));
    }
    let rows = c
        .rows()
        .map(|(x, row)| {
            let mut w: Vec<f64> = ys.iter().map(|y| row.weight(y)).collect();
            let k = (0..w.len()).fold(0, |b, i| if w[i] > w[b] { i } else { b });
            let moved = eps.min(w[k]);
            w[k] -= moved;
            w[(k + 1) % ys.len()] += moved;
            Ok((x.clone(), Dist::categorical(ys.iter().cloned().zip(w))?))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    FiniteKernel::new(c.domain.clone(), c.codomain.clone(), rows)
}

/// The two sides of the Bayes equation as systems `y → (X × Y)y`.
pub fn bayes_sides(c: &FiniteKernel, prior: &Dist, inverse: &FiniteKernel) -> Result<(HierSystem, HierSystem)> {
    if inverse.domain != c.codomain || inverse.codomain != c.domain {
        return Err(Error::Shape(format!(
            "inverse {} -> {} does not reverse {} -> {}",
            inverse.domain, inverse.codomain, c.domain, c.codomain
        )));
    }
    let (x, y) = (&c.domain, &c.codomain);
    let pi = HierSystem::prior(x.clone(), prior.clone())?;
    let ch = HierSystem::channel(c)?;
    let left = compose_chain(&[
        pi.clone(),
        copy_system(x),
        tensor_hier(&id_hier(&Polynomial::linear(x.clone())), &ch)?,
    ])?;
    let right = compose_chain(&[
        pi,
        ch,
        copy_system(y),
        tensor_hier(&HierSystem::channel(inverse)?, &id_hier(&Polynomial::linear(y.clone())))?,
    ])?;
    Ok((left, right))
}

/// Decides whether `inverse` is a Bayesian inverse of `c` against `prior`,
/// by comparing the traces of both sides from their intended initial laws
/// over `horizon` steps.
pub fn bayes_check(c: &FiniteKernel, prior: &Dist, inverse: &FiniteKernel, horizon: u64, tol: f64) -> Result<Verdict> {
    let (left, right) = bayes_sides(c, prior, inverse)?;
    let opts = BisimOptions { horizon: horizon.max(1), tol, ..Default::default() };
    let mut v = quasi_bisim(&left, &right, &[HierSection::input(Point::Unit)], &opts)?;
    v.report.law = "bayes inversion".into();
    Ok(v)
}
