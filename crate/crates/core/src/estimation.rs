//! Jaccard similarity estimators and error bounds.
//!
//! Estimates are not clamped to `[0, 1]`; clamping would bias them. Use
//! [`SimilarityEstimate::clamped`] for presentation only.

use std::fmt;

use crate::error::{Error, Result};
use crate::privacy::{PrivateSketchLap, PrivateSketchRr};
use crate::sketching::Sketch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    MinHash,
    Rr,
    Laplace,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::MinHash => "minhash",
            Method::Rr => "rr",
            Method::Laplace => "laplace",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "minhash" => Ok(Method::MinHash),
            "rr" | "rrminhash" => Ok(Method::Rr),
            "laplace" | "lap" | "noisyminhash" => Ok(Method::Laplace),
            other => Err(Error::invalid(format!("unknown mechanism {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityEstimate {
    pub value: f64,
    pub method: Method,
    /// Fraction of colliding slots; set for the discrete methods.
    pub collision_rate: Option<f64>,
}

impl SimilarityEstimate {
    pub fn clamped(&self) -> f64 {
        self.value.clamp(0.0, 1.0)
    }
}

fn collision_rate(a: &[u32], b: &[u32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::invalid("cannot estimate from empty sketches"));
    }
    let hits = a.iter().zip(b).filter(|(x, y)| x == y).count();
    Ok(hits as f64 / a.len() as f64)
}

/// Non-private range-B MinHash estimate `(B p_col - 1) / (B - 1)`.
pub fn estimate_minhash(x: &Sketch, y: &Sketch, buckets: u32) -> Result<SimilarityEstimate> {
    let p_col = collision_rate(x.values(), y.values())?;
    let b = buckets as f64;
    Ok(SimilarityEstimate {
        value: (b * p_col - 1.0) / (b - 1.0),
        method: Method::MinHash,
        collision_rate: Some(p_col),
    })
}

/// The randomized-response estimator as a function of the collision rate:
/// `(B - 1)(B p_col - 1) / (B p* - 1)^2`.
pub fn rr_estimate_from_collisions(p_col: f64, buckets: u32, p_star: f64) -> Result<f64> {
    let b = buckets as f64;
    let gain = b * p_star - 1.0;
    if gain.abs() < 1e-15 {
        return Err(Error::ZeroBudget);
    }
    Ok((b - 1.0) * (b * p_col - 1.0) / (gain * gain))
}

pub fn estimate_rr(
    x: &PrivateSketchRr,
    y: &PrivateSketchRr,
    buckets: u32,
    p_star: f64,
) -> Result<SimilarityEstimate> {
    let p_col = collision_rate(x.values(), y.values())?;
    Ok(SimilarityEstimate {
        value: rr_estimate_from_collisions(p_col, buckets, p_star)?,
        method: Method::Rr,
        collision_rate: Some(p_col),
    })
}

/// Probability that two randomized responses collide in one slot, for sets
/// with Jaccard similarity `j`.
pub fn rr_collision_prob(j: f64, buckets: u32, p_star: f64) -> f64 {
    let b = buckets as f64;
    (j + b * j * p_star * (b * p_star - 2.0) + b - 1.0) / (b * (b - 1.0))
}

/// The Laplace estimator as a function of the squared distance `sq_dist`:
/// `((B^2 - 1) K - 6 sq_dist + 24 K scale^2) / ((B^2 - 1) K)`.
pub fn laplace_estimate_from_distance(sq_dist: f64, len: usize, buckets: u32, scale: f64) -> f64 {
    let b = buckets as f64;
    let k = len as f64;
    let norm = (b * b - 1.0) * k;
    (norm - 6.0 * sq_dist + 24.0 * k * scale * scale) / norm
}

pub fn estimate_laplace(
    x: &PrivateSketchLap,
    y: &PrivateSketchLap,
    buckets: u32,
    scale: f64,
) -> Result<SimilarityEstimate> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::invalid("cannot estimate from empty sketches"));
    }
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(Error::invalid(format!("noise scale must be non-negative, got {scale}")));
    }
    let sq_dist: f64 = x
        .values()
        .iter()
        .zip(y.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(SimilarityEstimate {
        value: laplace_estimate_from_distance(sq_dist, x.len(), buckets, scale),
        method: Method::Laplace,
        collision_rate: None,
    })
}

/// With probability at least `1 - delta_fail` the randomized-response
/// estimate is within this distance of the true similarity:
/// `sqrt(3 ln(1/delta) B^3 (1 + p*(B p* - 2)) / (K (B p* - 1)^4))`.
pub fn rr_error_bound(buckets: u32, num_functions: usize, p_star: f64, delta_fail: f64) -> Result<f64> {
    let b = buckets as f64;
    let gain = b * p_star - 1.0;
    if gain <= 0.0 {
        return Err(Error::ZeroBudget);
    }
    if num_functions == 0 {
        return Err(Error::invalid("K must be positive"));
    }
    if !(delta_fail > 0.0 && delta_fail <= 1.0) {
        return Err(Error::invalid(format!("delta_fail must lie in (0, 1], got {delta_fail}")));
    }
    let numerator = 3.0 * (1.0 / delta_fail).ln() * b.powi(3) * (1.0 + p_star * (b * p_star - 2.0));
    Ok((numerator / (num_functions as f64 * gain.powi(4))).sqrt())
}
