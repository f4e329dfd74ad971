//! Locally differentially private MinHash sketches.
//!
//! Users sketch their item sets with a shared family of range-B MinHash
//! functions and release the sketch after perturbing it with either
//! generalized randomized response ([`privacy::perturb_rr`]) or additive
//! Laplace noise ([`privacy::perturb_laplace`]). A curator estimates the
//! Jaccard similarity of two users from their released sketches with the
//! unbiased estimators in [`estimation`].
//!
//! The [`harness`] module reproduces the utility experiments (MAE sweeps on
//! synthetic pairs, nearest-neighbor recall on rating datasets).

pub mod dataset;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod privacy;
pub mod seed;
pub mod sketch_io;
pub mod sketching;
pub mod synthetic;

pub use error::{Error, Result};
pub use estimation::{Method, SimilarityEstimate};
pub use privacy::{LapParams, PrivacyParams, PrivateSketchLap, PrivateSketchRr, RrParams};
pub use sketching::{HashFamily, Sketch, UserVector};
