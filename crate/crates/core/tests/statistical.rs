//! Monte Carlo checks against closed-form distributions.
//!
//! Every test uses a fixed seed, so a pass is reproducible. Tolerances are
//! at least 3.5 standard errors of the quantity being checked.

use ldp_minhash::estimation::{rr_collision_prob, rr_estimate_from_collisions};
use ldp_minhash::harness::mae::{run_mae_experiment, MaeConfig};
use ldp_minhash::privacy::{laplace_noise, perturb_rr, perturb_rr_with_coins, GrrCoin, RrParams};
use ldp_minhash::seed::{derive_seed, rng_from_seed, split};
use ldp_minhash::synthetic::{gen_pair, PairSpec, SyntheticPair};
use ldp_minhash::{HashFamily, Method, Sketch};
use statrs::distribution::{Binomial, Discrete};

const M: u32 = 1 << 20;

fn pair(tau: u32, j: f64, seed: u64) -> SyntheticPair {
    gen_pair(&PairSpec {
        universe: M,
        tau,
        j_target: j,
        seed,
    })
    .unwrap()
}

#[test]
fn minwise_values_agree_with_probability_j() {
    // tau = 30 and J = 0.5 give 20 shared items out of 40
    let p = pair(30, 0.5, 1);
    assert_eq!(p.j_realized, 0.5);
    let (families, k) = (1000, 100);
    let mut agree = 0usize;
    for f in 0..families {
        let family = HashFamily::new(k, 2, M, derive_seed(11, &[f])).unwrap();
        for slot in 0..k {
            agree += (family.minwise_value(slot, &p.x).unwrap() == family.minwise_value(slot, &p.y).unwrap()) as usize;
        }
    }
    let rate = agree as f64 / (families as usize * k) as f64;
    // standard error sqrt(0.25 / 1e5) = 0.0016
    assert!((rate - 0.5).abs() < 0.0063, "{rate}");
}

#[test]
fn buckets_are_uniform() {
    let family = HashFamily::new(200, 5, M, 99).unwrap();
    let mut counts = [0usize; 5];
    for slot in 0..200 {
        for item in 0..500u32 {
            counts[family.bucket_of(slot, item * 7919) as usize] += 1;
        }
    }
    let n = 100_000.0;
    for c in counts {
        assert!((c as f64 / n - 0.2).abs() < 0.005, "{counts:?}");
    }
}

#[test]
fn laplace_moments_and_tail() {
    let n = 1_000_000;
    let unit = laplace_noise(&mut rng_from_seed(5), 1.0, n).unwrap();
    let mean = unit.iter().sum::<f64>() / n as f64;
    assert!(mean.abs() < 0.005, "mean {mean}");
    // Pr[|X| > 2] = e^-2 at scale 1
    let tail = unit.iter().filter(|v| v.abs() > 2.0).count() as f64 / n as f64;
    assert!((tail - (-2f64).exp()).abs() < 0.002, "tail {tail}");

    let half = laplace_noise(&mut rng_from_seed(6), 0.5, n).unwrap();
    let m = half.iter().sum::<f64>() / n as f64;
    let var = half.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
    assert!((var - 0.5).abs() < 0.01, "variance {var}");
}

#[test]
fn keep_rate_and_flip_targets() {
    let (k, b, p) = (1000, 4, 0.6);
    let rp = RrParams::with_keep_probability(k, b, p).unwrap();
    let s = Sketch::from_values(vec![1; k], b).unwrap();
    let mut counts = [0usize; 4];
    for t in 0..100 {
        for &v in perturb_rr(&s, &rp, t).unwrap().values() {
            counts[v as usize] += 1;
        }
    }
    let n = 100_000.0;
    assert!((counts[1] as f64 / n - p).abs() < 0.006, "{counts:?}");
    for v in [0, 2, 3] {
        assert!((counts[v] as f64 / n - (1.0 - p) / 3.0).abs() < 0.005, "{counts:?}");
    }
}

/// Exact output law of randomized response for K = 3, B = 2, p* = 0.75,
/// enumerated through every coin sequence and compared with the product
/// formula, then against sampled frequencies.
#[test]
fn rr_output_distribution_is_exact() {
    let p = 0.75;
    let s = Sketch::from_values(vec![0, 1, 1], 2).unwrap();
    let coin = [(GrrCoin::Keep, p), (GrrCoin::Flip(0), 1.0 - p)];
    let mut law = [0.0f64; 8];
    for a in coin {
        for b in coin {
            for c in coin {
                let out = perturb_rr_with_coins(&s, &[a.0, b.0, c.0]).unwrap();
                let code = out.values().iter().fold(0, |acc, &v| acc * 2 + v as usize);
                law[code] += a.1 * b.1 * c.1;
            }
        }
    }
    for (code, &prob) in law.iter().enumerate() {
        let bits = [(code >> 2) & 1, (code >> 1) & 1, code & 1];
        let expected: f64 = bits
            .iter()
            .zip([0, 1, 1])
            .map(|(&o, z)| if o == z { p } else { 1.0 - p })
            .product();
        assert!((prob - expected).abs() < 1e-12, "output {code:03b}");
    }

    let rp = RrParams::with_keep_probability(3, 2, p).unwrap();
    let draws = 200_000;
    let mut seen = [0usize; 8];
    for t in 0..draws {
        let out = perturb_rr(&s, &rp, derive_seed(3, &[t])).unwrap();
        seen[out.values().iter().fold(0, |acc, &v| acc * 2 + v as usize)] += 1;
    }
    for code in 0..8 {
        let f = seen[code] as f64 / draws as f64;
        let se = (law[code] * (1.0 - law[code]) / draws as f64).sqrt();
        assert!((f - law[code]).abs() < 4.0 * se, "output {code:03b}: {f} vs {}", law[code]);
    }
}

/// Mean absolute error over `reps` pairs computed slot by slot.
fn empirical_rr_mae(k: usize, b: u32, p: f64, reps: u64) -> f64 {
    let rp = RrParams::with_keep_probability(k, b, p).unwrap();
    let total: f64 = (0..reps)
        .map(|r| {
            let seed = derive_seed(21, &[r]);
            let pr = pair(30, 0.5, split(seed, 0));
            let family = HashFamily::new(k, b, M, split(seed, 1)).unwrap();
            let x = perturb_rr(&family.sketch(&pr.x).unwrap(), &rp, split(seed, 2)).unwrap();
            let y = perturb_rr(&family.sketch(&pr.y).unwrap(), &rp, split(seed, 3)).unwrap();
            let hits = x.values().iter().zip(y.values()).filter(|(a, b)| a == b).count();
            (rr_estimate_from_collisions(hits as f64 / k as f64, b, p).unwrap() - 0.5).abs()
        })
        .sum();
    total / reps as f64
}

/// Slots collide independently, so the collision count is binomial and the
/// MAE is a finite sum.
fn binomial_mae(k: u64, q: f64, estimate: impl Fn(f64) -> f64, j: f64) -> f64 {
    let law = Binomial::new(q, k).unwrap();
    (0..=k).map(|c| law.pmf(c) * (estimate(c as f64 / k as f64) - j).abs()).sum()
}

#[test]
fn rr_mae_matches_binomial_oracle() {
    let (k, b, p, j) = (100, 2, 0.9, 0.5);
    let q = rr_collision_prob(j, b, p);
    let oracle = binomial_mae(k as u64, q, |c| rr_estimate_from_collisions(c, b, p).unwrap(), j);
    let empirical = empirical_rr_mae(k, b, p, 20_000);
    assert!((empirical - oracle).abs() < 0.005, "{empirical} vs oracle {oracle}");
}

fn minhash_mae(tau: u32, reps: usize) -> f64 {
    let rows = run_mae_experiment(&MaeConfig {
        taus: vec![tau],
        j_targets: vec![0.5],
        ks: vec![100],
        buckets: vec![2],
        mechanisms: vec![Method::MinHash],
        reps,
        master_seed: 8,
        ..MaeConfig::default()
    })
    .unwrap();
    rows[0].value.unwrap()
}

#[test]
fn minhash_mae_matches_binomial_oracle_and_ignores_tau() {
    let oracle = binomial_mae(100, 0.75, |c| 2.0 * c - 1.0, 0.5);
    assert!((oracle - 0.08).abs() < 0.02, "{oracle}");
    let small = minhash_mae(30, 10_000);
    assert!((small - oracle).abs() < 0.005, "{small} vs oracle {oracle}");
    // J = 0.5 is exact at tau = 300 too (200 shared out of 400)
    let large = minhash_mae(300, 3_000);
    assert!((large - oracle).abs() < 0.006, "{large} vs oracle {oracle}");
}
