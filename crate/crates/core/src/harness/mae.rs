//! Mean absolute error of the estimators on synthetic pairs.
//!
//! Each repetition generates a fresh pair, a fresh hash family and fresh
//! noise. The error of a repetition is `|estimate - J_realized|`, where
//! `J_realized` is the exact similarity of the generated pair.

use rayon::prelude::*;

use super::config::KvConfig;
use super::metrics::mean_and_std;
use super::output::ResultRow;
use super::{method_label, Mechanism};
use crate::error::{Error, Result};
use crate::estimation::Method;
use crate::privacy::PrivacyParams;
use crate::seed::{derive_seed, split};
use crate::sketching::HashFamily;
use crate::synthetic::{gen_pair, PairSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct MaeConfig {
    pub taus: Vec<u32>,
    pub j_targets: Vec<f64>,
    pub ks: Vec<usize>,
    pub buckets: Vec<u32>,
    pub epsilons: Vec<f64>,
    pub delta: f64,
    pub alpha: u32,
    pub mechanisms: Vec<Method>,
    pub reps: usize,
    pub master_seed: u64,
    /// Universe the synthetic items are drawn from.
    pub universe: u32,
    /// Clamp estimates to `[0, 1]` before measuring the error.
    pub clamp: bool,
}

impl Default for MaeConfig {
    fn default() -> Self {
        MaeConfig {
            taus: vec![20, 50, 100, 250, 500, 1000, 2000],
            j_targets: vec![0.1, 0.5, 0.9],
            ks: (10..=500).step_by(10).collect(),
            buckets: vec![2, 3, 5],
            epsilons: vec![2.0, 4.0, 6.0],
            delta: 1e-4,
            alpha: 1,
            mechanisms: vec![Method::MinHash, Method::Rr, Method::Laplace],
            reps: 100,
            master_seed: 0,
            universe: 1 << 20,
            clamp: false,
        }
    }
}

pub const MAE_KEYS: &[&str] = &[
    "taus", "j_targets", "ks", "buckets", "epsilons", "delta", "alpha", "mechanisms", "reps", "seed",
    "universe", "clamp",
];

impl MaeConfig {
    /// Defaults overridden by the keys present in `kv`.
    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        kv.reject_unknown(MAE_KEYS)?;
        let d = MaeConfig::default();
        let cfg = MaeConfig {
            taus: ints(kv, "taus")?.unwrap_or(d.taus),
            j_targets: kv.get_list("j_targets")?.unwrap_or(d.j_targets),
            ks: ints(kv, "ks")?.unwrap_or(d.ks),
            buckets: ints(kv, "buckets")?.unwrap_or(d.buckets),
            epsilons: kv.get_list("epsilons")?.unwrap_or(d.epsilons),
            delta: kv.get("delta")?.unwrap_or(d.delta),
            alpha: kv.get("alpha")?.unwrap_or(d.alpha),
            mechanisms: kv.get_list("mechanisms")?.unwrap_or(d.mechanisms),
            reps: kv.get("reps")?.unwrap_or(d.reps),
            master_seed: kv.get("seed")?.unwrap_or(d.master_seed),
            universe: kv.get("universe")?.unwrap_or(d.universe),
            clamp: kv.get("clamp")?.unwrap_or(d.clamp),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::invalid("reps must be at least 1"));
        }
        let empty = [
            ("taus", self.taus.is_empty()),
            ("j_targets", self.j_targets.is_empty()),
            ("ks", self.ks.is_empty()),
            ("buckets", self.buckets.is_empty()),
            ("mechanisms", self.mechanisms.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::invalid(format!("{name} must not be empty")));
        }
        let private = self.mechanisms.iter().any(|m| *m != Method::MinHash);
        if private && self.epsilons.is_empty() {
            return Err(Error::invalid("epsilons must not be empty for private mechanisms"));
        }
        Ok(())
    }
}

fn ints<T: TryFrom<u64>>(kv: &KvConfig, key: &str) -> Result<Option<Vec<T>>> {
    kv.get_int_list(key)?
        .map(|v| {
            v.into_iter()
                .map(|x| T::try_from(x).map_err(|_| Error::Format(format!("{key}: {x} out of range"))))
                .collect()
        })
        .transpose()
}

#[derive(Debug, Clone, Copy)]
struct Job {
    tau: u32,
    j_target: f64,
    buckets: u32,
    method: Method,
    epsilon: Option<f64>,
    num_functions: usize,
}

impl Job {
    fn seed_path(&self, rep: usize) -> [u64; 7] {
        [
            self.tau as u64,
            self.j_target.to_bits(),
            self.buckets as u64,
            method_label(self.method),
            self.epsilon.map_or(0, f64::to_bits),
            self.num_functions as u64,
            rep as u64,
        ]
    }
}

fn jobs(cfg: &MaeConfig) -> Vec<Job> {
    let mut out = Vec::new();
    for &tau in &cfg.taus {
        for &j_target in &cfg.j_targets {
            for &buckets in &cfg.buckets {
                for &method in &cfg.mechanisms {
                    let eps: Vec<Option<f64>> = match method {
                        Method::MinHash => vec![None],
                        _ => cfg.epsilons.iter().copied().map(Some).collect(),
                    };
                    for epsilon in eps {
                        for &num_functions in &cfg.ks {
                            out.push(Job {
                                tau,
                                j_target,
                                buckets,
                                method,
                                epsilon,
                                num_functions,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Absolute errors of `reps` independent trials at one grid point.
fn trial_errors(cfg: &MaeConfig, job: &Job, mech: &Mechanism) -> Result<Vec<f64>> {
    (0..cfg.reps)
        .map(|rep| {
            let seed = derive_seed(cfg.master_seed, &job.seed_path(rep));
            let pair = gen_pair(&PairSpec {
                universe: cfg.universe,
                tau: job.tau,
                j_target: job.j_target,
                seed: split(seed, 0),
            })?;
            let family = HashFamily::new(job.num_functions, job.buckets, cfg.universe, split(seed, 1))?;
            let x = mech.release(&family.sketch(&pair.x)?, split(seed, 2))?;
            let y = mech.release(&family.sketch(&pair.y)?, split(seed, 3))?;
            let mut est = mech.estimate(&x, &y)?;
            if cfg.clamp {
                est = est.clamp(0.0, 1.0);
            }
            Ok((est - pair.j_realized).abs())
        })
        .collect()
}

fn run_job(cfg: &MaeConfig, job: &Job) -> Result<ResultRow> {
    let private = job.method != Method::MinHash;
    let mut row = ResultRow {
        experiment: "mae".into(),
        mechanism: job.method.to_string(),
        buckets: job.buckets,
        num_functions: job.num_functions,
        epsilon: job.epsilon,
        delta: private.then_some(cfg.delta),
        alpha: private.then_some(cfg.alpha),
        tau: Some(job.tau),
        j_target: Some(job.j_target),
        metric: "mae".into(),
        value: None,
        std: None,
        reps: 0,
    };
    let privacy = match job.epsilon {
        Some(eps) => match PrivacyParams::new(eps, cfg.delta, cfg.alpha, job.tau) {
            Ok(pp) => Some(pp),
            Err(e) => {
                row.metric = format!("skipped: {e}");
                return Ok(row);
            }
        },
        None => None,
    };
    let mech = match Mechanism::new(job.method, job.num_functions, job.buckets, privacy.as_ref()) {
        Ok(m) => m,
        Err(e) => {
            row.metric = format!("skipped: {e}");
            return Ok(row);
        }
    };
    let errors = trial_errors(cfg, job, &mech)?;
    let (mean, std) = mean_and_std(&errors);
    row.value = Some(mean);
    row.std = Some(std);
    row.reps = errors.len();
    Ok(row)
}

/// One row per grid point, in grid order
/// `tau > J_target > B > mechanism > epsilon > K`.
pub fn run_mae_experiment(cfg: &MaeConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    jobs(cfg).par_iter().map(|job| run_job(cfg, job)).collect()
}
