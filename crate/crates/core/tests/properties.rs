//! Invariants that must hold for every input, checked with proptest.

use ldp_minhash::dataset::{filter_min_size, Dataset, DatasetUser};
use ldp_minhash::estimation::{
    estimate_laplace, estimate_minhash, estimate_rr, laplace_estimate_from_distance, rr_collision_prob,
    rr_estimate_from_collisions,
};
use ldp_minhash::privacy::{
    difference_bound, difference_budget, keep_probability, GrrCoin, PrivacyParams, PrivateSketchLap,
    PrivateSketchRr,
};
use ldp_minhash::synthetic::{gen_pair, intersection_size, true_jaccard, PairSpec};
use ldp_minhash::{HashFamily, Sketch, UserVector};
use proptest::prelude::*;

const M: u32 = 500;

fn item_set() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0..M, 1..60)
}

fn sketch_pair(max_b: u32) -> impl Strategy<Value = (u32, Vec<u32>, Vec<u32>)> {
    (2..=max_b, 1usize..40).prop_flat_map(|(b, k)| {
        (
            Just(b),
            prop::collection::vec(0..b, k),
            prop::collection::vec(0..b, k),
        )
    })
}

proptest! {
    #[test]
    fn sketch_ignores_order_and_duplicates(items in item_set(), seed: u64) {
        let family = HashFamily::new(16, 3, M, seed).unwrap();
        let mut shuffled = items.clone();
        shuffled.reverse();
        shuffled.extend_from_slice(&items);
        let a = family.sketch(&UserVector::new(items, M).unwrap()).unwrap();
        let b = family.sketch(&UserVector::new(shuffled, M).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn union_minimum_comes_from_a_part(xs in item_set(), ys in item_set(), seed: u64) {
        let family = HashFamily::new(8, 4, M, seed).unwrap();
        let x = UserVector::new(xs.clone(), M).unwrap();
        let y = UserVector::new(ys.clone(), M).unwrap();
        let u = UserVector::new(xs.into_iter().chain(ys), M).unwrap();
        for slot in 0..8 {
            let w = family.minwise_value(slot, &u).unwrap();
            let wx = family.minwise_value(slot, &x).unwrap();
            let wy = family.minwise_value(slot, &y).unwrap();
            prop_assert!(w == wx || w == wy);
            prop_assert!(x.contains(wx) && y.contains(wy));
        }
    }

    #[test]
    fn estimators_are_symmetric((b, xs, ys) in sketch_pair(6), p in 0.0f64..1.0, scale in 0.0f64..3.0) {
        let p_star = 1.0 / b as f64 + (1.0 - 1.0 / b as f64) * (0.01 + 0.99 * p);
        let x = Sketch::from_values(xs.clone(), b).unwrap();
        let y = Sketch::from_values(ys.clone(), b).unwrap();
        prop_assert_eq!(estimate_minhash(&x, &y, b).unwrap(), estimate_minhash(&y, &x, b).unwrap());
        let xr = PrivateSketchRr::from_values(xs.clone(), b).unwrap();
        let yr = PrivateSketchRr::from_values(ys.clone(), b).unwrap();
        prop_assert_eq!(estimate_rr(&xr, &yr, b, p_star).unwrap(), estimate_rr(&yr, &xr, b, p_star).unwrap());
        let xl = PrivateSketchLap::from_values(xs.iter().map(|&v| v as f64 + 0.25).collect()).unwrap();
        let yl = PrivateSketchLap::from_values(ys.iter().map(|&v| v as f64 - 0.5).collect()).unwrap();
        prop_assert_eq!(
            estimate_laplace(&xl, &yl, b, scale).unwrap(),
            estimate_laplace(&yl, &xl, b, scale).unwrap()
        );
    }

    #[test]
    fn rr_estimator_inverts_collision_law(j in 0.0f64..=1.0, b in 2u32..10, p in 0.0f64..1.0) {
        let p_star = 1.0 / b as f64 + (1.0 - 1.0 / b as f64) * (0.05 + 0.95 * p);
        let back = rr_estimate_from_collisions(rr_collision_prob(j, b, p_star), b, p_star).unwrap();
        prop_assert!((back - j).abs() < 1e-12, "{} vs {}", back, j);
    }

    #[test]
    fn collision_law_is_a_probability(j in 0.0f64..=1.0, b in 2u32..10, p in 0.0f64..1.0) {
        let p_star = 1.0 / b as f64 + (1.0 - 1.0 / b as f64) * p;
        let q = rr_collision_prob(j, b, p_star);
        prop_assert!(q >= 1.0 / b as f64 - 1e-12 && q <= 1.0 + 1e-12);
    }

    #[test]
    fn estimators_are_monotone(b in 2u32..8, p in 0.0f64..1.0, lo in 0.0f64..1.0, hi in 0.0f64..1.0, scale in 0.0f64..2.0) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let p_star = 1.0 / b as f64 + (1.0 - 1.0 / b as f64) * (0.05 + 0.95 * p);
        prop_assert!(rr_estimate_from_collisions(lo, b, p_star).unwrap() <= rr_estimate_from_collisions(hi, b, p_star).unwrap());
        let k = 20;
        prop_assert!(
            laplace_estimate_from_distance(hi * 50.0, k, b, scale) <= laplace_estimate_from_distance(lo * 50.0, k, b, scale)
        );
    }

    #[test]
    fn budget_stays_in_range(k in 1usize..2000, b in 2u32..8, eps in 0.1f64..10.0, alpha in 1u32..5, extra in 0u32..3000) {
        let pp = PrivacyParams::new(eps, 1e-4, alpha, alpha + extra).unwrap();
        let l = difference_budget(k, b, &pp).unwrap();
        prop_assert!(l >= 1 && l <= k);
        prop_assert!(difference_bound(k, b, &pp).unwrap() <= difference_bound(k + 1, b, &pp).unwrap());
        let p = keep_probability(eps / l as f64, b);
        prop_assert!(p > 1.0 / b as f64 && p < 1.0);
    }

    #[test]
    fn flipped_values_always_change(b in 2u32..10, z in 0u32..10, pick in 0u32..9) {
        let z = z % b;
        let pick = pick % (b - 1);
        let out = GrrCoin::Flip(pick).apply(z);
        prop_assert!(out != z && out < b);
        prop_assert_eq!(GrrCoin::Keep.apply(z), z);
    }

    #[test]
    fn sketch_serializations_round_trip((b, xs, _) in sketch_pair(300), noise in prop::collection::vec(-1e6f64..1e6, 1..30)) {
        let s = Sketch::from_values(xs, b).unwrap();
        prop_assert_eq!(&Sketch::from_text(&s.to_text(), b).unwrap(), &s);
        prop_assert_eq!(&Sketch::from_compact_bytes(&s.to_compact_bytes(), b).unwrap(), &s);
        let lap = PrivateSketchLap::from_values(noise).unwrap();
        prop_assert_eq!(PrivateSketchLap::from_text(&lap.to_text()).unwrap(), lap);
    }

    #[test]
    fn min_size_filter_is_idempotent(sizes in prop::collection::vec(1usize..30, 0..15), tau in 0usize..30) {
        let users = sizes
            .iter()
            .enumerate()
            .map(|(i, &n)| DatasetUser {
                id: format!("u{i}"),
                items: UserVector::new(0..n as u32, 40).unwrap(),
            })
            .collect();
        let ds = Dataset { users, universe: 40, item_ids: vec![], provenance: "test".into() };
        let once = filter_min_size(&ds, tau);
        let twice = filter_min_size(&once, tau);
        prop_assert_eq!(&once.users, &twice.users);
        prop_assert!(once.users.iter().all(|u| u.items.len() >= tau));
        prop_assert_eq!(once.users.len(), sizes.iter().filter(|&&n| n >= tau).count());
    }

    #[test]
    fn synthetic_pairs_hit_their_overlap(tau in 1u32..300, j in 0.01f64..=1.0, seed: u64) {
        let pair = gen_pair(&PairSpec { universe: 5000, tau, j_target: j, seed }).unwrap();
        let i = intersection_size(tau, j);
        prop_assert_eq!(pair.x.len(), tau as usize);
        prop_assert_eq!(pair.y.len(), tau as usize);
        prop_assert_eq!(pair.x.overlap(&pair.y).0, i as usize);
        prop_assert_eq!(true_jaccard(&pair.x, &pair.y).unwrap(), pair.j_realized);
        prop_assert_eq!(true_jaccard(&pair.y, &pair.x).unwrap(), pair.j_realized);
    }
}
