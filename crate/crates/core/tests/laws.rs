//! Property tests for lenses, kernels and the flow law.

use std::collections::BTreeMap;

use polydyn::coalg::{check_flow, pairs_up_to, reindex, System};
use polydyn::monad::{dst, kleisli_compose, Dist, Kernel};
use polydyn::poly::{all_sections, compose_map, pull_section, Effect, Point, PolyMap, Polynomial, Space, Time};
use proptest::prelude::*;

fn n(k: usize) -> Point {
    Point::label(k.to_string())
}

fn idx(p: &Point) -> usize {
    p.as_label().unwrap().parse().unwrap()
}

/// `{0..np}` positions, each with `dirs[i]` directions.
fn interface(dirs: &[usize]) -> Polynomial {
    Polynomial::tabulated(Space::range(dirs.len()), dirs.iter().enumerate().map(|(i, &d)| (n(i), Space::range(d)))).unwrap()
}

fn lens(p: &Polynomial, q: &Polynomial, seed: &[usize]) -> PolyMap {
    let qs = q.positions().enumerate().unwrap();
    let mut fwd = BTreeMap::new();
    let mut back = BTreeMap::new();
    let mut k = 0;
    let mut next = || {
        k += 1;
        seed[k % seed.len()] + k
    };
    for i in p.positions().enumerate().unwrap() {
        let j = qs[next() % qs.len()].clone();
        let src = p.directions_at(&i).unwrap().enumerate().unwrap();
        for d in q.directions_at(&j).unwrap().enumerate().unwrap() {
            back.insert((i.clone(), d), src[next() % src.len()].clone());
        }
        fwd.insert(i, j);
    }
    PolyMap::lens(p.clone(), q.clone(), move |i| fwd[i].clone(), move |i, d| back[&(i.clone(), d.clone())].clone())
}

fn kernel(size: usize, weights: &[u8]) -> Kernel {
    let mut rows = BTreeMap::new();
    for x in 0..size {
        let raw: Vec<f64> = (0..size).map(|y| f64::from(weights[(x * size + y) % weights.len()])).collect();
        let total: f64 = raw.iter().sum::<f64>().max(1.0);
        let law = if raw.iter().all(|w| *w == 0.0) {
            Dist::dirac(n(x))
        } else {
            Dist::categorical(raw.iter().enumerate().map(|(y, w)| (n(y), w / total))).unwrap()
        };
        rows.insert(n(x), law);
    }
    Kernel::from_table(rows)
}

fn dirs_strategy() -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(1usize..4, 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lens_composition_is_associative(
        a in dirs_strategy(), b in dirs_strategy(), c in dirs_strategy(), d in dirs_strategy(),
        seed in proptest::collection::vec(0usize..7, 2..9),
    ) {
        let (p, q, r, s) = (interface(&a), interface(&b), interface(&c), interface(&d));
        let (f, g, h) = (lens(&p, &q, &seed), lens(&q, &r, &seed[1..]), lens(&r, &s, &seed));
        let left = compose_map(&h, &compose_map(&g, &f).unwrap()).unwrap();
        let right = compose_map(&compose_map(&h, &g).unwrap(), &f).unwrap();
        prop_assert_eq!(left.discrepancy(&right).unwrap(), 0.0);
        let unit = compose_map(&PolyMap::identity(&q), &f).unwrap();
        prop_assert_eq!(unit.discrepancy(&f).unwrap(), 0.0);
    }

    #[test]
    fn pulled_sections_close_the_reindexed_system(
        a in dirs_strategy(), b in dirs_strategy(),
        seed in proptest::collection::vec(0usize..7, 1..9),
        states in 1usize..5,
    ) {
        let (p, q) = (interface(&a), interface(&b));
        let phi = lens(&p, &q, &seed);
        let (np, nd) = (a.len(), seed.clone());
        let sys = System::deterministic(p, Space::range(states), move |s| n(idx(s) % np), move |s, d| {
            n((idx(s) + idx(d) + nd[idx(s) % nd.len()]) % states)
        });
        let moved = reindex(&phi, &sys).unwrap();
        for tau in all_sections(&q, 256).unwrap() {
            let (a, b) = (moved.closure(&tau).unwrap(), sys.closure(&pull_section(&phi, &tau).unwrap()).unwrap());
            for s in sys.states().enumerate().unwrap() {
                for t in 0..4 {
                    prop_assert_eq!(a.step(Time(t), &s).unwrap(), b.step(Time(t), &s).unwrap());
                }
            }
        }
    }

    /// Dyadic weights keep every sum exact, so the laws hold at tolerance 0.
    #[test]
    fn kleisli_composition_is_associative(
        size in 1usize..5,
        w1 in proptest::collection::vec(0u8..4, 1..17),
        w2 in proptest::collection::vec(0u8..4, 1..17),
        w3 in proptest::collection::vec(0u8..4, 1..17),
    ) {
        let (k1, k2, k3) = (kernel(size, &w1), kernel(size, &w2), kernel(size, &w3));
        let left = kleisli_compose(&k3, &kleisli_compose(&k2, &k1));
        let right = kleisli_compose(&kleisli_compose(&k3, &k2), &k1);
        for x in 0..size {
            let (a, b) = (left.apply(&n(x)).unwrap(), right.apply(&n(x)).unwrap());
            prop_assert!(a.distance(&b) < 1e-12, "{} vs {}", a.kind_name(), b.kind_name());
            // the unit is a two-sided identity
            prop_assert_eq!(Kernel::unit().extend(&a).unwrap(), a.clone());
        }
    }

    #[test]
    fn independent_product_has_the_right_marginals(
        a in proptest::collection::vec(1u8..5, 1..5),
        b in proptest::collection::vec(1u8..5, 1..5),
    ) {
        let law = |w: &[u8]| {
            let total: f64 = w.iter().map(|&x| f64::from(x)).sum();
            Dist::categorical(w.iter().enumerate().map(|(k, &x)| (n(k), f64::from(x) / total))).unwrap()
        };
        let (p, q) = (law(&a), law(&b));
        let joint = dst(&p, &q).unwrap();
        for (x, wx) in p.atoms().unwrap() {
            let marginal: f64 = q.atoms().unwrap().iter().map(|(y, _)| joint.weight(&Point::pair(x.clone(), y.clone()))).sum();
            prop_assert!((marginal - wx).abs() < 1e-12);
        }
    }

    #[test]
    fn random_stochastic_systems_satisfy_the_flow_law(
        states in 1usize..5,
        w in proptest::collection::vec(0u8..4, 1..25),
        outs in proptest::collection::vec(0usize..2, 4),
    ) {
        let k = kernel(states, &w);
        let p = interface(&[2, 1]);
        let sys = System::discrete(p.clone(), Space::range(states), Effect::Stochastic, move |s| Ok(n(outs[idx(s)])), move |s, d| {
            // direction 1 holds still, direction 0 steps the chain
            if d == &n(1) { Ok(Dist::dirac(s.clone())) } else { k.apply(s) }
        });
        let sections = all_sections(&p, 16).unwrap();
        let report = check_flow(&sys, &sections, &pairs_up_to(6), &sys.states().enumerate().unwrap(), 1e-12);
        prop_assert!(report.passed, "{:?}", report.witnesses);
    }
}
