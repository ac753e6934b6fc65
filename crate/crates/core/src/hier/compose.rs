//! Sequential and parallel composition of hierarchical systems.

use crate::error::{Error, Result};
use crate::monad::{dst, Kernel};
use crate::poly::{compose_map, tensor_map, Space};

use super::system::HierSystem;

fn joint_init(a: &HierSystem, b: &HierSystem) -> Result<Option<crate::monad::Dist>> {
    match (&a.init, &b.init) {
        (Some(x), Some(y)) => Ok(Some(dst(x, y)?)),
        _ => Ok(None),
    }
}

/// `γ ∘ β` for `β : p → q` and `γ : q → r`, with state `X_β × X_γ`.
///
/// The composite emits `γ(y) ∘ β(x)`. On input `(i, d″)` the outer system
/// absorbs `(β(x)₁ i, d″)`, and the inner one absorbs `(i, d′)` with `d′`
/// drawn from `γ(y)^#(β(x)₁ i, d″)`.
pub fn compose_hier(beta: &HierSystem, gamma: &HierSystem) -> Result<HierSystem> {
    if beta.target != gamma.source {
        return Err(Error::Shape(format!(
            "cannot compose {} -> {} after {} -> {}",
            gamma.source, gamma.target, beta.source, beta.target
        )));
    }
    let (b1, g1) = (beta.clone(), gamma.clone());
    let (b2, g2) = (beta.clone(), gamma.clone());
    let init = joint_init(beta, gamma)?;
    let sys = HierSystem::new(
        beta.source.clone(),
        gamma.target.clone(),
        Space::pair(beta.states.clone(), gamma.states.clone()),
        move |xy| compose_map(&g1.emit(xy.component(1)?)?, &b1.emit(xy.component(0)?)?),
        move |xy, i, d| {
            let (x, y) = (xy.component(0)?.clone(), xy.component(1)?);
            let f = b2.emit(&x)?;
            let g = g2.emit(y)?;
            let j = f.forward(i)?;
            let outer = g2.absorb(y, &j, d)?;
            let mid = g.backward(&j, d)?;
            let (b3, i) = (b2.clone(), i.clone());
            let inner = Kernel::new(move |e| b3.absorb(&x, &i, e)).extend(&mid)?;
            dst(&inner, &outer)
        },
    );
    Ok(match init {
        Some(law) => sys.with_init(law)?,
        None => sys,
    })
}

/// `β ⊗ β′ : p ⊗ p′ → q ⊗ q′`, acting componentwise.
pub fn tensor_hier(beta: &HierSystem, other: &HierSystem) -> Result<HierSystem> {
    let (b1, o1) = (beta.clone(), other.clone());
    let (b2, o2) = (beta.clone(), other.clone());
    let init = joint_init(beta, other)?;
    let sys = HierSystem::new(
        beta.source.tensor(&other.source),
        beta.target.tensor(&other.target),
        Space::pair(beta.states.clone(), other.states.clone()),
        move |xy| Ok(tensor_map(&b1.emit(xy.component(0)?)?, &o1.emit(xy.component(1)?)?)),
        move |xy, i, d| {
            let left = b2.absorb(xy.component(0)?, i.component(0)?, d.component(0)?)?;
            let right = o2.absorb(xy.component(1)?, i.component(1)?, d.component(1)?)?;
            dst(&left, &right)
        },
    );
    Ok(match init {
        Some(law) => sys.with_init(law)?,
        None => sys,
    })
}

/// Composes a chain `β₁, β₂, …` left to right, bracketing to the left.
pub fn compose_chain(parts: &[HierSystem]) -> Result<HierSystem> {
    let (first, rest) = parts
        .split_first()
        .ok_or_else(|| Error::Invalid("empty composition chain".into()))?;
    rest.iter().try_fold(first.clone(), |acc, next| compose_hier(&acc, next))
}
