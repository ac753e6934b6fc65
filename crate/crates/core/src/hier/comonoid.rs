//! The copy/discard structure on linear interfaces `Ay`.

use crate::error::Result;
use crate::poly::{Point, Polynomial, Space};

use super::system::HierSystem;

fn lin(a: &Space) -> Polynomial {
    Polynomial::linear(a.clone())
}

/// `copy_A : Ay → Ay ⊗ Ay`, `a ↦ (a, a)`.
pub fn copy_system(a: &Space) -> HierSystem {
    HierSystem::linear_map(lin(a), lin(a).tensor(&lin(a)), |x| Point::pair(x.clone(), x.clone())).expect("linear")
}

/// `discard_A : Ay → y`.
pub fn discard_system(a: &Space) -> HierSystem {
    HierSystem::function(a.clone(), Space::Unit, |_| Point::Unit)
}

/// `swap : Ay ⊗ By → By ⊗ Ay`.
pub fn swap_system(a: &Space, b: &Space) -> HierSystem {
    HierSystem::linear_map(lin(a).tensor(&lin(b)), lin(b).tensor(&lin(a)), |ab| {
        Point::pair(ab.component(1).expect("pair").clone(), ab.component(0).expect("pair").clone())
    })
    .expect("linear")
}

/// The three sides of each comonoid law, as `(law, lhs, rhs)`.
pub fn comonoid_law_systems(a: &Space) -> Result<Vec<(&'static str, HierSystem, HierSystem)>> {
    use super::compose::{compose_hier, tensor_hier};
    use super::system::id_hier;
    let id = id_hier(&Polynomial::linear(a.clone()));
    let (copy, del) = (copy_system(a), discard_system(a));
    Ok(vec![
        ("counit-left", compose_hier(&copy, &tensor_hier(&del, &id)?)?, id.clone()),
        ("counit-right", compose_hier(&copy, &tensor_hier(&id, &del)?)?, id.clone()),
        (
            "coassociativity",
            compose_hier(&copy, &tensor_hier(&copy, &id)?)?,
            compose_hier(&copy, &tensor_hier(&id, &copy)?)?,
        ),
        ("cocommutativity", compose_hier(&copy, &swap_system(a, a))?, copy),
    ])
}
