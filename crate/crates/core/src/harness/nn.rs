//! Nearest-neighbor search on private sketches.
//!
//! Every user is sketched with a family shared by all users of a
//! repetition and released through the mechanism. For each query the other
//! users are ranked by estimated similarity (ties by dataset position), with
//! no re-ranking against the true vectors. A query never counts itself as a
//! neighbor.

use std::cmp::Ordering;

use rand::seq::index;
use rayon::prelude::*;

use super::config::KvConfig;
use super::metrics::{approx_similarity_ratio, mean_and_std, recall_at_k};
use super::output::ResultRow;
use super::{method_label, Mechanism};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::estimation::Method;
use crate::privacy::PrivacyParams;
use crate::seed::{derive_seed, rng_from_seed};
use crate::sketching::HashFamily;
use crate::synthetic::true_jaccard;

const QUERY_STREAM: u64 = 0x0051_5545_5259;

#[derive(Debug, Clone, PartialEq)]
pub struct NnConfig {
    pub queries: usize,
    /// Size of the true neighborhood used for eligibility and the ratio.
    pub k_true: usize,
    pub depths: Vec<usize>,
    /// Minimum similarity of a query's `k_true`-th true neighbor.
    pub j_min: f64,
    pub mechanisms: Vec<Method>,
    pub epsilons: Vec<f64>,
    pub ks: Vec<usize>,
    pub buckets: Vec<u32>,
    pub delta: f64,
    pub alpha: u32,
    /// Minimum set size assumed by the privacy calculus; defaults to the
    /// smallest vector in the dataset.
    pub tau: Option<u32>,
    pub reps: usize,
    pub master_seed: u64,
}

impl Default for NnConfig {
    fn default() -> Self {
        NnConfig {
            queries: 50,
            k_true: 10,
            depths: vec![10, 50, 100],
            j_min: 0.1,
            mechanisms: vec![Method::MinHash, Method::Rr, Method::Laplace],
            epsilons: vec![4.0, 8.0],
            ks: vec![50, 100],
            buckets: vec![2],
            delta: 1e-4,
            alpha: 1,
            tau: None,
            reps: 5,
            master_seed: 0,
        }
    }
}

pub const NN_KEYS: &[&str] = &[
    "queries", "k_true", "depths", "j_min", "mechanisms", "epsilons", "ks", "buckets", "delta", "alpha",
    "tau", "reps", "seed",
];

impl NnConfig {
    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        kv.reject_unknown(NN_KEYS)?;
        let d = NnConfig::default();
        let to_usize = |v: Vec<u64>| v.into_iter().map(|x| x as usize).collect::<Vec<_>>();
        let cfg = NnConfig {
            queries: kv.get("queries")?.unwrap_or(d.queries),
            k_true: kv.get("k_true")?.unwrap_or(d.k_true),
            depths: kv.get_int_list("depths")?.map(to_usize).unwrap_or(d.depths),
            j_min: kv.get("j_min")?.unwrap_or(d.j_min),
            mechanisms: kv.get_list("mechanisms")?.unwrap_or(d.mechanisms),
            epsilons: kv.get_list("epsilons")?.unwrap_or(d.epsilons),
            ks: kv.get_int_list("ks")?.map(to_usize).unwrap_or(d.ks),
            buckets: kv.get_list("buckets")?.unwrap_or(d.buckets),
            delta: kv.get("delta")?.unwrap_or(d.delta),
            alpha: kv.get("alpha")?.unwrap_or(d.alpha),
            tau: kv.get("tau")?.or(d.tau),
            reps: kv.get("reps")?.unwrap_or(d.reps),
            master_seed: kv.get("seed")?.unwrap_or(d.master_seed),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.queries == 0 || self.k_true == 0 || self.reps == 0 {
            return Err(Error::invalid("queries, k_true and reps must be at least 1"));
        }
        if self.depths.is_empty() || self.depths.contains(&0) {
            return Err(Error::invalid("depths must be non-empty and positive"));
        }
        if self.mechanisms.is_empty() || self.ks.is_empty() || self.buckets.is_empty() {
            return Err(Error::invalid("mechanisms, ks and buckets must not be empty"));
        }
        if self.mechanisms.iter().any(|m| *m != Method::MinHash) && self.epsilons.is_empty() {
            return Err(Error::invalid("epsilons must not be empty for private mechanisms"));
        }
        Ok(())
    }
}

/// Exact pairwise Jaccard similarities of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityTable {
    n: usize,
    sims: Vec<f64>,
}

impl SimilarityTable {
    pub fn new(ds: &Dataset) -> Result<Self> {
        let n = ds.users.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|j| true_jaccard(&ds.users[i].items, &ds.users[j].items))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        Ok(SimilarityTable {
            n,
            sims: rows.into_iter().flatten().collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.sims[i * self.n + j]
    }

    /// All other users ordered by decreasing true similarity to `i`
    /// (ties by position).
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        rank_by(self.n, i, |j| self.get(i, j))
    }
}

/// Indices other than `exclude`, by decreasing score then increasing index.
fn rank_by(n: usize, exclude: usize, score: impl Fn(usize) -> f64) -> Vec<usize> {
    let mut scored: Vec<(f64, usize)> = (0..n).filter(|&j| j != exclude).map(|j| (score(j), j)).collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1)));
    scored.into_iter().map(|(_, j)| j).collect()
}

/// Users whose `k_true`-th nearest neighbor has similarity at least `j_min`.
pub fn eligible_queries(truth: &SimilarityTable, k_true: usize, j_min: f64) -> Vec<usize> {
    (0..truth.len())
        .filter(|&i| {
            let ranked = truth.neighbors(i);
            ranked.get(k_true - 1).is_some_and(|&j| truth.get(i, j) >= j_min)
        })
        .collect()
}

/// Draws `cfg.queries` distinct eligible users uniformly at random.
pub fn select_queries(truth: &SimilarityTable, cfg: &NnConfig) -> Result<Vec<usize>> {
    let eligible = eligible_queries(truth, cfg.k_true, cfg.j_min);
    if eligible.len() < cfg.queries {
        return Err(Error::NotEnoughQueries {
            eligible: eligible.len(),
            requested: cfg.queries,
        });
    }
    let mut rng = rng_from_seed(derive_seed(cfg.master_seed, &[QUERY_STREAM]));
    let mut picked: Vec<usize> = index::sample(&mut rng, eligible.len(), cfg.queries)
        .into_iter()
        .map(|i| eligible[i])
        .collect();
    picked.sort_unstable();
    Ok(picked)
}

#[derive(Debug, Clone, Copy)]
struct GridPoint {
    buckets: u32,
    num_functions: usize,
    method: Method,
    epsilon: Option<f64>,
}

/// Per-query metrics of one repetition, averaged over queries:
/// one recall value per depth, then the approximation ratio.
fn run_repetition(
    ds: &Dataset,
    truth: &SimilarityTable,
    queries: &[usize],
    cfg: &NnConfig,
    point: &GridPoint,
    mech: &Mechanism,
    rep: usize,
) -> Result<Vec<f64>> {
    let family_seed = derive_seed(cfg.master_seed, &[point.buckets as u64, point.num_functions as u64, rep as u64]);
    let family = HashFamily::new(point.num_functions, point.buckets, ds.universe, family_seed)?;
    let noise_path = [
        point.buckets as u64,
        point.num_functions as u64,
        method_label(point.method),
        point.epsilon.map_or(0, f64::to_bits),
        rep as u64,
    ];
    let released = ds
        .users
        .par_iter()
        .enumerate()
        .map(|(u, user)| {
            let mut path = noise_path.to_vec();
            path.push(u as u64);
            mech.release(&family.sketch(&user.items)?, derive_seed(cfg.master_seed, &path))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut totals = vec![0.0; cfg.depths.len() + 1];
    for &q in queries {
        let estimates = (0..ds.users.len())
            .map(|j| if j == q { Ok(f64::NEG_INFINITY) } else { mech.estimate(&released[q], &released[j]) })
            .collect::<Result<Vec<f64>>>()?;
        let private = rank_by(ds.users.len(), q, |j| estimates[j]);
        let true_ranked = truth.neighbors(q);
        let true_nn = true_ranked[0];
        for (slot, &depth) in cfg.depths.iter().enumerate() {
            if recall_at_k(&true_nn, &private, depth) {
                totals[slot] += 1.0;
            }
        }
        let top = cfg.k_true.min(true_ranked.len());
        let true_sims: Vec<f64> = true_ranked[..top].iter().map(|&j| truth.get(q, j)).collect();
        let private_sims: Vec<f64> = private[..top].iter().map(|&j| truth.get(q, j)).collect();
        totals[cfg.depths.len()] += approx_similarity_ratio(&true_sims, &private_sims)?;
    }
    Ok(totals.into_iter().map(|t| t / queries.len() as f64).collect())
}

/// Recall at every depth and the approximate similarity ratio for each
/// grid point `B > K > mechanism > epsilon`, averaged over queries and
/// repetitions. `std` is taken across repetitions.
pub fn run_nn_experiment(ds: &Dataset, cfg: &NnConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    if ds.users.len() < 2 {
        return Err(Error::invalid("nearest-neighbor search needs at least two users"));
    }
    let tau = match cfg.tau {
        Some(t) => t,
        None => ds.users.iter().map(|u| u.items.len()).min().unwrap_or(1) as u32,
    };
    let truth = SimilarityTable::new(ds)?;
    let queries = select_queries(&truth, cfg)?;

    let mut points = Vec::new();
    for &buckets in &cfg.buckets {
        for &num_functions in &cfg.ks {
            for &method in &cfg.mechanisms {
                let eps: Vec<Option<f64>> = match method {
                    Method::MinHash => vec![None],
                    _ => cfg.epsilons.iter().copied().map(Some).collect(),
                };
                for epsilon in eps {
                    points.push(GridPoint {
                        buckets,
                        num_functions,
                        method,
                        epsilon,
                    });
                }
            }
        }
    }

    let mut rows = Vec::new();
    for point in &points {
        let private = point.method != Method::MinHash;
        let template = ResultRow {
            experiment: "nn".into(),
            mechanism: point.method.to_string(),
            buckets: point.buckets,
            num_functions: point.num_functions,
            epsilon: point.epsilon,
            delta: private.then_some(cfg.delta),
            alpha: private.then_some(cfg.alpha),
            tau: Some(tau),
            j_target: None,
            metric: String::new(),
            value: None,
            std: None,
            reps: 0,
        };
        let mech = point
            .epsilon
            .map(|eps| PrivacyParams::new(eps, cfg.delta, cfg.alpha, tau))
            .transpose()
            .and_then(|pp| Mechanism::new(point.method, point.num_functions, point.buckets, pp.as_ref()));
        let mech = match mech {
            Ok(m) => m,
            Err(e) => {
                rows.push(ResultRow {
                    metric: format!("skipped: {e}"),
                    ..template
                });
                continue;
            }
        };
        let per_rep = (0..cfg.reps)
            .map(|rep| run_repetition(ds, &truth, &queries, cfg, point, &mech, rep))
            .collect::<Result<Vec<_>>>()?;
        let metric_names = cfg
            .depths
            .iter()
            .map(|d| format!("recall@{d}"))
            .chain(std::iter::once("approx_ratio".to_string()));
        for (slot, name) in metric_names.enumerate() {
            let column: Vec<f64> = per_rep.iter().map(|r| r[slot]).collect();
            let (mean, std) = mean_and_std(&column);
            rows.push(ResultRow {
                metric: name,
                value: Some(mean),
                std: Some(std),
                reps: cfg.reps,
                ..template.clone()
            });
        }
    }
    Ok(rows)
}
