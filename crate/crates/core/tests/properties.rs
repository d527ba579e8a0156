use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

use rk_lattice::catalog::{coords, il_closed_form, NodeCoord};
use rk_lattice::oracle::{descriptor_at, tally, DEFAULT_ENUMERATION_BUDGET};
use rk_lattice::{
    are_isomorphic, build_theory, classify, compose_counts, enumerate_models, node_of, pareto_product,
    CountReport, LabeledPreorder, ModelKind, PreorderDocument, TheorySignature,
};

fn sig(k: u32, s: u32) -> TheorySignature {
    TheorySignature::new(k, s)
}

/// Every signature with `k + s <= n`.
fn signatures_up_to(n: u32) -> Vec<TheorySignature> {
    (0..=n).flat_map(|total| (0..=total).map(move |k| sig(k, total - k))).collect()
}

fn from_parts(n: usize, pairs: &[(usize, usize)], il: &[u32]) -> LabeledPreorder {
    LabeledPreorder::new(
        (0..n).map(|i| format!("n{i}")),
        pairs.iter().map(|&(a, b)| (format!("n{a}"), format!("n{b}"))),
        (0..n).map(|i| (format!("n{i}"), BigInt::from(il[i]))),
    )
    .unwrap()
}

fn arb_preorder() -> impl Strategy<Value = LabeledPreorder> {
    (1usize..7).prop_flat_map(|n| {
        (prop::collection::vec((0..n, 0..n), 0..12), prop::collection::vec(0u32..5, n))
            .prop_map(move |(pairs, il)| from_parts(n, &pairs, &il))
    })
}

/// Random partial orders: only pairs going up in index, so no cycles.
fn arb_poset() -> impl Strategy<Value = LabeledPreorder> {
    (1usize..7).prop_flat_map(|n| {
        (prop::collection::vec((0..n, 0..n), 0..12), prop::collection::vec(0u32..4, n)).prop_map(
            move |(pairs, il)| {
                let pairs: Vec<_> = pairs.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
                from_parts(n, &pairs, &il)
            },
        )
    })
}

fn relabel(p: &LabeledPreorder, perm: &[usize]) -> LabeledPreorder {
    let name = |i: usize| format!("m{}", perm[i]);
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by_key(|&i| perm[i]);
    LabeledPreorder::new(
        order.iter().map(|&i| name(i)),
        p.relation_pairs()
            .into_iter()
            .map(|(x, y)| (name(p.index_of(&x).unwrap()), name(p.index_of(&y).unwrap()))),
        (0..p.len()).map(|i| (name(i), BigInt::from(p.il(i).clone()))),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn closure_is_idempotent(p in arb_preorder()) {
        let again = LabeledPreorder::new(
            p.ids().iter().cloned(),
            p.relation_pairs(),
            p.ids().iter().cloned().zip(p.il_values().iter().map(|v| BigInt::from(v.clone()))),
        ).unwrap();
        prop_assert_eq!(&again, &p);
        for i in 0..p.len() {
            prop_assert!(p.leq(i, i));
            for j in p.up_set(i) {
                for l in p.up_set(j) {
                    prop_assert!(p.leq(i, l));
                }
            }
        }
    }

    #[test]
    fn quotient_is_idempotent_and_antisymmetric(p in arb_preorder()) {
        let q = p.quotient_rk();
        prop_assert!(q.is_antisymmetric());
        prop_assert_eq!(q.quotient_rk(), q.clone());
        prop_assert_eq!(q.il_total(), p.il_total());
    }

    #[test]
    fn product_sizes_and_counts(p in arb_preorder(), q in arb_preorder()) {
        let pq = pareto_product(&p, &q);
        prop_assert_eq!(pq.len(), p.len() * q.len());
        let lhs = pq.il_total() + BigUint::from(pq.len());
        let rhs = (p.il_total() + BigUint::from(p.len())) * (q.il_total() + BigUint::from(q.len()));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn isomorphism_finds_relabelings(p in arb_poset(), seed in any::<u64>()) {
        let mut perm: Vec<usize> = (0..p.len()).collect();
        let mut state = seed;
        for i in (1..perm.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (state >> 33) as usize % (i + 1));
        }
        let q = relabel(&p, &perm);
        let w = are_isomorphic(&p, &q);
        prop_assert!(w.is_some());
        prop_assert!(w.unwrap().verify(&p, &q));
        let back = are_isomorphic(&q, &p);
        prop_assert!(back.is_some());
        prop_assert!(back.unwrap().verify(&q, &p));
    }

    #[test]
    fn isomorphism_is_symmetric(p in arb_poset(), q in arb_poset()) {
        let forward = are_isomorphic(&p, &q);
        let backward = are_isomorphic(&q, &p);
        prop_assert_eq!(forward.is_some(), backward.is_some());
        if let Some(w) = forward {
            prop_assert!(w.verify(&p, &q));
        }
    }

    #[test]
    fn hasse_closure_recovers_order(p in arb_poset()) {
        let edges = p.hasse_edges().unwrap();
        let rebuilt = LabeledPreorder::new(
            p.ids().iter().cloned(),
            edges,
            p.ids().iter().cloned().zip(p.il_values().iter().map(|v| BigInt::from(v.clone()))),
        ).unwrap();
        prop_assert_eq!(rebuilt, p);
    }

    #[test]
    fn descriptor_restrictions_classify_consistently(k in 0u32..4, s in 0u32..4, index in any::<u64>(), k1 in 0u32..4, s1 in 0u32..4) {
        let sg = sig(k, s);
        let d = descriptor_at(sg, index % sg.model_count().to_u64().unwrap());
        let (left, right) = d.split(k1.min(k) as usize, s1.min(s) as usize);
        let either_limit = classify(&left) == ModelKind::Limit || classify(&right) == ModelKind::Limit;
        prop_assert_eq!(classify(&d) == ModelKind::Limit, either_limit);
        prop_assert_eq!(node_of(&left).concat(&node_of(&right)), node_of(&d));
    }
}

#[test]
fn product_commutes_and_associates_on_canonical_lattices() {
    let small = signatures_up_to(4);
    for a in &small {
        for b in &small {
            if a.k + a.s + b.k + b.s > 4 {
                continue;
            }
            let (pa, pb) = (build_theory(*a), build_theory(*b));
            let ab = pareto_product(&pa, &pb);
            let ba = pareto_product(&pb, &pa);
            assert!(are_isomorphic(&ab, &ba).is_some_and(|w| w.verify(&ab, &ba)), "{a} x {b}");
            for c in &small {
                if a.k + a.s + b.k + b.s + c.k + c.s > 4 {
                    continue;
                }
                let pc = build_theory(*c);
                let left = pareto_product(&ab, &pc);
                let right = pareto_product(&pa, &pareto_product(&pb, &pc));
                assert!(
                    are_isomorphic(&left, &right).is_some_and(|w| w.verify(&left, &right)),
                    "{a} {b} {c}"
                );
            }
        }
    }
}

/// Brute-force covering count straight from the coordinate order.
fn brute_force_covers(sg: TheorySignature) -> usize {
    let all: Vec<NodeCoord> = coords(sg).collect();
    let mut count = 0;
    for x in &all {
        for y in &all {
            if x == y || !x.leq(y) {
                continue;
            }
            if !all.iter().any(|z| z != x && z != y && x.leq(z) && z.leq(y)) {
                count += 1;
            }
        }
    }
    count
}

#[test]
fn hasse_edge_count_formula() {
    for sg in signatures_up_to(4) {
        let (k, s) = (sg.k as usize, sg.s as usize);
        let cube = if k == 0 { 0 } else { k * (1 << (k - 1)) * 3usize.pow(s as u32) };
        let grid = if s == 0 { 0 } else { 2 * s * 3usize.pow(s as u32 - 1) * (1 << k) };
        let brute = brute_force_covers(sg);
        assert_eq!(brute, cube + grid, "{sg}");
        assert_eq!(build_theory(sg).hasse_edges().unwrap().len(), brute, "{sg}");
    }
    assert_eq!(brute_force_covers(sig(0, 2)), 12);
    assert_eq!(brute_force_covers(sig(1, 1)), 7);
}

#[test]
fn il_sum_matches_limit_count() {
    for k in 0..=8 {
        for s in 0..=8 {
            let sg = sig(k, s);
            let sum: BigUint = coords(sg).map(|c| c.il()).sum();
            assert_eq!(sum, sg.model_count() - sg.node_count(), "{sg}");
            if k + s <= 5 {
                assert_eq!(build_theory(sg).il_total(), sum, "{sg}");
            }
        }
    }
}

#[test]
fn extremes_and_monotonicity() {
    for sg in signatures_up_to(4) {
        let p = build_theory(sg);
        let bottom = p.least().unwrap();
        let top = p.greatest().unwrap();
        assert!(p.il(bottom).is_zero());
        let top_il = (BigUint::one() << (sg.k + 2 * sg.s)) - 1u32;
        assert_eq!(p.il(top), &top_il);
        assert_eq!(p.il_values().iter().max().unwrap(), &top_il);
        if p.len() > 1 {
            assert!(p.il(top) >= &BigUint::one());
        }
        for i in 0..p.len() {
            for j in p.up_set(i) {
                assert!(p.il(i) <= p.il(j), "{sg}: {} <= {}", p.id(i), p.id(j));
            }
        }
    }
}

#[test]
fn compose_counts_agrees_with_products() {
    let small = signatures_up_to(4);
    for a in &small {
        for b in &small {
            if a.k + a.s + b.k + b.s > 4 {
                continue;
            }
            let composed =
                compose_counts(&CountReport::closed_form(*a), &CountReport::closed_form(*b)).unwrap();
            let product = pareto_product(&build_theory(*a), &build_theory(*b));
            let total: BigUint = product.il_values().iter().map(|v| v + 1u32).sum();
            assert_eq!(composed.total, total, "{a} o {b}");
            assert_eq!(composed.prime_count, BigUint::from(product.len()), "{a} o {b}");
            assert_eq!(composed.limit_count, product.il_total(), "{a} o {b}");

            // Node by node: the product node (x, y) is the concatenated coordinate.
            for x in coords(*a) {
                for y in coords(*b) {
                    let id = rk_lattice::poset::product_id(&x.id(), &y.id());
                    assert_eq!(product.il_of(&id), composed.per_node.get(&x.concat(&y)), "{a} o {b} at {id}");
                }
            }
        }
    }
}

#[test]
fn tally_matches_sequential_enumeration() {
    for sg in [sig(0, 0), sig(1, 0), sig(2, 1), sig(3, 2), sig(0, 5), sig(9, 0)] {
        let mut prime = 0u64;
        let mut limit: BTreeMap<NodeCoord, u64> = BTreeMap::new();
        let mut seen = 0u64;
        for d in enumerate_models(sg, DEFAULT_ENUMERATION_BUDGET).unwrap() {
            seen += 1;
            let node = node_of(&d);
            match classify(&d) {
                ModelKind::Prime => prime += 1,
                ModelKind::Limit => *limit.entry(node).or_default() += 1,
            }
        }
        let (report, primes) = tally(sg, DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert_eq!(BigUint::from(seen), report.total);
        assert_eq!(BigUint::from(prime), report.prime_count);
        assert!(primes.iter().all(|&n| n == 1));
        for (node, value) in &report.per_node {
            assert_eq!(*value, BigUint::from(limit.get(node).copied().unwrap_or(0)), "{sg} {node}");
            assert_eq!(*value, il_closed_form(node.t(), node.m()));
        }
    }
}

#[test]
fn json_round_trip_for_canonical_lattices() {
    for sg in signatures_up_to(4) {
        let p = build_theory(sg);
        let text = PreorderDocument::from_preorder(&p, Some(sg)).to_json();
        let doc = PreorderDocument::from_json(&text).unwrap();
        assert_eq!(doc.signature(), Some(sg));
        assert_eq!(doc.to_preorder().unwrap(), p);
    }
}
