//! Utility experiments: MAE sweeps on synthetic pairs and nearest-neighbor
//! search on rating datasets.
//!
//! Every trial draws its randomness from a seed derived from the master seed
//! and the grid point's parameter values, so results do not depend on the
//! execution schedule or on what else is in the grid.

pub mod config;
pub mod mae;
pub mod metrics;
pub mod nn;
pub mod output;

pub use config::KvConfig;
pub use mae::{run_mae_experiment, MaeConfig};
pub use metrics::{approx_similarity_ratio, mean_absolute_error, mean_and_std, recall_at_k};
pub use nn::{run_nn_experiment, select_queries, NnConfig, SimilarityTable};
pub use output::{write_csv, ResultRow};

use crate::error::Result;
use crate::estimation::Method;
use crate::privacy::{perturb_laplace, perturb_rr, LapParams, PrivacyParams, RrParams};
use crate::sketch_io::{estimate_released, ReleasedSketch, SketchHeader};
use crate::sketching::Sketch;

/// A release mechanism with its derived parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mechanism {
    MinHash { num_functions: usize, buckets: u32 },
    Rr(RrParams),
    Laplace(LapParams),
}

impl Mechanism {
    /// `privacy` is ignored for [`Method::MinHash`].
    pub fn new(
        method: Method,
        num_functions: usize,
        buckets: u32,
        privacy: Option<&PrivacyParams>,
    ) -> Result<Self> {
        let need = || {
            privacy.ok_or_else(|| {
                crate::Error::invalid(format!("mechanism {method} needs privacy parameters"))
            })
        };
        Ok(match method {
            Method::MinHash => Mechanism::MinHash {
                num_functions,
                buckets,
            },
            Method::Rr => Mechanism::Rr(RrParams::new(num_functions, buckets, need()?)?),
            Method::Laplace => Mechanism::Laplace(LapParams::new(num_functions, buckets, need()?)?),
        })
    }

    pub fn method(&self) -> Method {
        match self {
            Mechanism::MinHash { .. } => Method::MinHash,
            Mechanism::Rr(_) => Method::Rr,
            Mechanism::Laplace(_) => Method::Laplace,
        }
    }

    pub fn header(&self, family_seed: Option<u64>) -> SketchHeader {
        let (buckets, num_functions) = match self {
            Mechanism::MinHash {
                num_functions,
                buckets,
            } => (*buckets, *num_functions),
            Mechanism::Rr(rp) => (rp.buckets(), rp.num_functions()),
            Mechanism::Laplace(lp) => (lp.buckets(), lp.num_functions()),
        };
        SketchHeader {
            mechanism: self.method(),
            buckets,
            num_functions,
            family_seed,
            keep_probability: match self {
                Mechanism::Rr(rp) => Some(rp.keep_probability()),
                _ => None,
            },
            scale: match self {
                Mechanism::Laplace(lp) => Some(lp.scale()),
                _ => None,
            },
        }
    }

    /// Perturbs a sketch with noise seeded by `seed`.
    pub fn release(&self, sketch: &Sketch, seed: u64) -> Result<ReleasedSketch> {
        Ok(match self {
            Mechanism::MinHash { .. } => ReleasedSketch::MinHash(sketch.clone()),
            Mechanism::Rr(rp) => ReleasedSketch::Rr(perturb_rr(sketch, rp, seed)?),
            Mechanism::Laplace(lp) => ReleasedSketch::Laplace(perturb_laplace(sketch, lp, seed)?),
        })
    }

    /// Raw (unclamped) similarity estimate of two released sketches.
    pub fn estimate(&self, x: &ReleasedSketch, y: &ReleasedSketch) -> Result<f64> {
        Ok(estimate_released(&self.header(None), x, y)?.value)
    }
}

pub(crate) fn method_label(method: Method) -> u64 {
    match method {
        Method::MinHash => 0,
        Method::Rr => 1,
        Method::Laplace => 2,
    }
}
