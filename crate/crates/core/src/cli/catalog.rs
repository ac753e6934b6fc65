//! Bundled specs and example constructions used by the command line.

use crate::coalg::System;
use crate::error::{Error, Result};
use crate::monad::Dist;
use crate::poly::{Point, PolyMap, Polynomial, Space, Time};
use crate::random_bundle::{BundleSystem, MeasurePreservingSystem, MpMorphism, RandomSystem};

const BUILTINS: &[(&str, &str)] = &[
    ("counter", include_str!("../../data/counter.json")),
    ("markov", include_str!("../../data/markov.json")),
    ("thermostat", include_str!("../../data/thermostat.json")),
    ("decay", include_str!("../../data/decay.json")),
    ("cyclic_shift", include_str!("../../data/cyclic_shift.json")),
    ("biased_swap", include_str!("../../data/biased_swap.json")),
    ("bayes", include_str!("../../data/bayes.json")),
    ("bayes_perturbed", include_str!("../../data/bayes_perturbed.json")),
    ("laplace_1d", include_str!("../../data/laplace_1d.json")),
    ("laplace_stack", include_str!("../../data/laplace_stack.json")),
];

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTINS.iter().map(|(n, _)| *n)
}

/// The text of `builtin:<name>`, or of the file at a path.
pub fn load_text(spec: &str) -> Result<String> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        return BUILTINS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, text)| text.to_string())
            .ok_or_else(|| {
                let known: Vec<_> = builtin_names().collect();
                Error::Parse(format!("unknown builtin {name:?}; known: {}", known.join(", ")))
            });
    }
    std::fs::read_to_string(spec).map_err(|e| Error::Parse(format!("cannot read {spec}: {e}")))
}

fn l(s: &str) -> Point {
    Point::label(s)
}

fn n(k: usize) -> Point {
    l(&k.to_string())
}

fn idx(p: &Point) -> usize {
    p.as_label().and_then(|s| s.parse().ok()).expect("numeric label")
}

/// A fibre `Z₃` driven by noise from the cyclic shift on `Z₆` and an input
/// in `{0, 1}`.
pub fn skew_product_example() -> Result<RandomSystem> {
    let base = MeasurePreservingSystem::cyclic_shift(6)?;
    let p = Polynomial::monomial(Space::finite(["lo", "hi"])?, Space::range(2));
    RandomSystem::skew_product(
        base,
        Space::range(3),
        p,
        |_, x| if x == &l("0") { l("lo") } else { l("hi") },
        |w, x, d| n((idx(w) % 2 + idx(x) + idx(d)) % 3),
        vec![Time(1), Time(2), Time(3)],
    )
}

/// A relabelling of the skew product's interface.
pub fn skew_relabel(p: &Polynomial) -> Result<PolyMap> {
    let q = Polynomial::monomial(Space::finite(["A", "B"])?, Space::range(2));
    Ok(PolyMap::lens(p.clone(), q, |i| if i == &l("lo") { l("B") } else { l("A") }, |_, d| {
        if d == &l("0") { l("1") } else { l("0") }
    }))
}

/// The quotient of the `Z₆` noise onto `Z₃`.
pub fn noise_quotient(rds: &RandomSystem) -> Result<MpMorphism> {
    MpMorphism::new(rds.base().clone(), MeasurePreservingSystem::cyclic_shift(3)?, |k| Ok(n(idx(k) % 3)))
}

/// A base over `b = d0·y^{c0,c1} + d1·y` alternating its two states, and a
/// total system on `Z₂ × Z₃` over `{B0, B1} y^{Z₂}` lying above it.
pub fn bundle_example() -> Result<BundleSystem> {
    let b = Polynomial::tabulated(
        Space::finite(["d0", "d1"])?,
        [(l("d0"), Space::finite(["c0", "c1"])?), (l("d1"), Space::Unit)],
    )?;
    let base = System::deterministic(b, Space::range(2), |w| if w == &l("0") { l("d0") } else { l("d1") }, |w, _| {
        n((idx(w) + 1) % 2)
    });
    let p = Polynomial::monomial(Space::finite(["B0", "B1"])?, Space::range(2));
    let total = System::deterministic(
        p,
        Space::pair(Space::range(2), Space::range(3)),
        |s| if s.component(1).expect("pair") == &l("0") { l("B0") } else { l("B1") },
        |s, a| {
            let (w, x) = (idx(s.component(0).expect("pair")), idx(s.component(1).expect("pair")));
            Point::pair(n((w + 1) % 2), n((x + idx(a) + w) % 3))
        },
    );
    BundleSystem::new(base, total, |s| Ok(s.component(0)?.clone()), vec![Time(1), Time(2), Time(3)])
}

/// A relabelling of the bundle's base onto `{a, b}`.
pub fn bundle_relabel(bs: &BundleSystem) -> (System, impl Fn(&Point) -> Result<Point> + Send + Sync + Clone + 'static) {
    let swap = System::deterministic(
        bs.base().interface().clone(),
        Space::finite(["a", "b"]).expect("labels"),
        |w| if w == &l("a") { l("d0") } else { l("d1") },
        |w, _| if w == &l("a") { l("b") } else { l("a") },
    );
    (swap, |w: &Point| Ok(if w == &l("0") { l("a") } else { l("b") }))
}

/// A system on `Z₃` over `{a, b} y^{Z₂}`, with two composable interface maps.
pub fn opindex_example() -> Result<(System, PolyMap, PolyMap)> {
    let p = Polynomial::monomial(Space::finite(["a", "b"])?, Space::range(2));
    let sys = System::deterministic(p.clone(), Space::range(3), |s| if s == &l("0") { l("a") } else { l("b") }, |s, d| {
        n((idx(s) + idx(d) + 1) % 3)
    });
    let q = Polynomial::monomial(Space::finite(["u", "v", "w"])?, Space::range(3));
    let phi = PolyMap::lens(p, q.clone(), |i| if i == &l("a") { l("w") } else { l("u") }, |i, d| {
        if d == &l("2") || i == &l("b") { l("1") } else { l("0") }
    });
    let r = Polynomial::monomial(Space::finite(["x", "y"])?, Space::range(2));
    let psi = PolyMap::lens(q, r, |j| if j == &l("u") { l("y") } else { l("x") }, |_, d| {
        if d == &l("0") { l("2") } else { l("0") }
    });
    Ok((sys, phi, psi))
}

/// Uniform law over a finite space.
pub fn uniform(space: &Space) -> Result<Dist> {
    Dist::uniform(&space.enumerate()?)
}
