//! Privacy-budget calculus and the two perturbation mechanisms.
//!
//! Neighboring users differ in at most `alpha` items and hold at least `tau`
//! items. With probability `1 - delta`, their sketches then differ in at most
//! [`difference_bound`] slots, and the budget `epsilon` is spent on that many
//! differences.
//!
//! Randomized response uses the ceiled bound `L` and per-slot budget
//! `epsilon / L`. The Laplace mechanism uses the un-ceiled bound for its
//! sensitivity `(B - 1) * L`.
//!
//! Laplace noise is drawn by inverse CDF from a 53-bit uniform. This is not
//! hardened against floating-point attacks on the Laplace mechanism.

use rand::Rng;

use crate::error::{Error, Result};
use crate::seed::rng_from_seed;
use crate::sketching::{join_values, parse_values, validate_buckets, Sketch};

/// Budget `(epsilon, delta)` and neighboring notion `(alpha, tau)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyParams {
    epsilon: f64,
    delta: f64,
    alpha: u32,
    tau: u32,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, delta: f64, alpha: u32, tau: u32) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
        }
        if alpha == 0 || tau == 0 {
            return Err(Error::invalid("alpha and tau must be positive"));
        }
        if alpha > tau {
            return Err(Error::invalid(format!(
                "alpha ({alpha}) exceeds tau ({tau}); the neighboring notion is vacuous"
            )));
        }
        Ok(PrivacyParams {
            epsilon,
            delta,
            alpha,
            tau,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn tau(&self) -> u32 {
        self.tau
    }
}

fn check_shape(num_functions: usize, buckets: u32) -> Result<()> {
    if num_functions == 0 {
        return Err(Error::invalid("need at least one hash function (K >= 1)"));
    }
    if buckets < 2 {
        return Err(Error::invalid("range-B MinHash requires B >= 2"));
    }
    Ok(())
}

/// High-probability bound on the number of differing sketch slots of two
/// neighboring users:
/// `K (a/t)(1 - 1/B) + sqrt(3 ln(1/delta) (1 - 1/B) K a/t)`.
pub fn difference_bound(num_functions: usize, buckets: u32, pp: &PrivacyParams) -> Result<f64> {
    check_shape(num_functions, buckets)?;
    let k = num_functions as f64;
    let spread = 1.0 - 1.0 / buckets as f64;
    let ratio = pp.alpha as f64 / pp.tau as f64;
    Ok(k * ratio * spread + (3.0 * (1.0 / pp.delta).ln() * spread * k * ratio).sqrt())
}

/// [`difference_bound`] rounded up and clamped to `[1, K]`.
pub fn difference_budget(num_functions: usize, buckets: u32, pp: &PrivacyParams) -> Result<usize> {
    let raw = difference_bound(num_functions, buckets, pp)?;
    Ok((raw.ceil() as usize).clamp(1, num_functions))
}

/// Keep probability of generalized randomized response with budget `eps`.
pub fn keep_probability(eps: f64, buckets: u32) -> f64 {
    // e^eps / (e^eps + B - 1), written to stay finite for large eps
    1.0 / (1.0 + (buckets as f64 - 1.0) * (-eps).exp())
}

/// Parameters of the randomized-response mechanism.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrParams {
    num_functions: usize,
    buckets: u32,
    budget: usize,
    epsilon_prime: f64,
    keep_probability: f64,
}

impl RrParams {
    /// Derives `L`, `epsilon' = epsilon / L` and the keep probability.
    pub fn new(num_functions: usize, buckets: u32, pp: &PrivacyParams) -> Result<Self> {
        let budget = difference_budget(num_functions, buckets, pp)?;
        let epsilon_prime = pp.epsilon / budget as f64;
        Ok(RrParams {
            num_functions,
            buckets,
            budget,
            epsilon_prime,
            keep_probability: keep_probability(epsilon_prime, buckets),
        })
    }

    /// Parameters with an explicit keep probability `p* in (1/B, 1]`.
    ///
    /// `budget` is reported as 1 and `epsilon_prime` is the per-slot budget
    /// implied by `p*` (infinite at `p* = 1`).
    pub fn with_keep_probability(num_functions: usize, buckets: u32, p_star: f64) -> Result<Self> {
        check_shape(num_functions, buckets)?;
        let b = buckets as f64;
        if !(p_star > 1.0 / b && p_star <= 1.0) {
            return Err(Error::invalid(format!(
                "keep probability must lie in (1/B, 1], got {p_star}"
            )));
        }
        let epsilon_prime = (p_star * (b - 1.0) / (1.0 - p_star)).ln();
        Ok(RrParams {
            num_functions,
            buckets,
            budget: 1,
            epsilon_prime,
            keep_probability: p_star,
        })
    }

    pub fn num_functions(&self) -> usize {
        self.num_functions
    }

    pub fn buckets(&self) -> u32 {
        self.buckets
    }

    /// The ceiled difference budget `L`.
    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn epsilon_prime(&self) -> f64 {
        self.epsilon_prime
    }

    pub fn keep_probability(&self) -> f64 {
        self.keep_probability
    }
}

/// Parameters of the Laplace mechanism.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LapParams {
    num_functions: usize,
    buckets: u32,
    sensitivity: f64,
    scale: f64,
}

impl LapParams {
    /// Sensitivity `(B - 1) * L` with the un-ceiled `L`, scale `sensitivity / epsilon`.
    pub fn new(num_functions: usize, buckets: u32, pp: &PrivacyParams) -> Result<Self> {
        let raw = difference_bound(num_functions, buckets, pp)?;
        let sensitivity = (buckets as f64 - 1.0) * raw;
        Ok(LapParams {
            num_functions,
            buckets,
            sensitivity,
            scale: sensitivity / pp.epsilon,
        })
    }

    /// Parameters with an explicit noise scale (sensitivity reported as `scale`).
    pub fn with_scale(num_functions: usize, buckets: u32, scale: f64) -> Result<Self> {
        check_shape(num_functions, buckets)?;
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid(format!("noise scale must be positive, got {scale}")));
        }
        Ok(LapParams {
            num_functions,
            buckets,
            sensitivity: scale,
            scale,
        })
    }

    pub fn num_functions(&self) -> usize {
        self.num_functions
    }

    pub fn buckets(&self) -> u32 {
        self.buckets
    }

    pub fn sensitivity(&self) -> f64 {
        self.sensitivity
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

/// Released sketch of the randomized-response mechanism.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrivateSketchRr {
    values: Vec<u32>,
    buckets: u32,
}

impl PrivateSketchRr {
    pub fn from_values(values: Vec<u32>, buckets: u32) -> Result<Self> {
        validate_buckets(&values, buckets)?;
        Ok(PrivateSketchRr { values, buckets })
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn buckets(&self) -> u32 {
        self.buckets
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_text(&self) -> String {
        join_values(&self.values)
    }

    pub fn from_text(line: &str, buckets: u32) -> Result<Self> {
        Self::from_values(parse_values(line)?, buckets)
    }
}

/// Released sketch of the Laplace mechanism.
#[derive(Debug, Clone, PartialEq)]
pub struct PrivateSketchLap {
    values: Vec<f64>,
}

impl PrivateSketchLap {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Format(format!("non-finite sketch value {v}")));
        }
        Ok(PrivateSketchLap { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Comma-separated shortest round-trip decimals.
    pub fn to_text(&self) -> String {
        self.values
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn from_text(line: &str) -> Result<Self> {
        let line = line.trim();
        if line.is_empty() {
            return Self::from_values(Vec::new());
        }
        let values = line
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("bad sketch value {tok:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(values)
    }
}

/// Outcome of one randomized-response coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrrCoin {
    Keep,
    /// Replace the value by the `pick`-th bucket (in `0..B-1`) among the
    /// `B - 1` buckets different from it.
    Flip(u32),
}

impl GrrCoin {
    pub fn draw<R: Rng + ?Sized>(rng: &mut R, keep_probability: f64, buckets: u32) -> Self {
        if rng.random::<f64>() < keep_probability {
            GrrCoin::Keep
        } else {
            GrrCoin::Flip(rng.random_range(0..buckets - 1))
        }
    }

    /// Applies the coin to a true value `z`.
    #[inline]
    pub fn apply(self, z: u32) -> u32 {
        match self {
            GrrCoin::Keep => z,
            GrrCoin::Flip(pick) if pick >= z => pick + 1,
            GrrCoin::Flip(pick) => pick,
        }
    }
}

fn check_rr_input(s: &Sketch, rp: &RrParams) -> Result<()> {
    if s.len() != rp.num_functions {
        return Err(Error::LengthMismatch {
            left: s.len(),
            right: rp.num_functions,
        });
    }
    if s.buckets() != rp.buckets {
        return Err(Error::invalid(format!(
            "sketch has B = {} but mechanism expects B = {}",
            s.buckets(),
            rp.buckets
        )));
    }
    Ok(())
}

/// Generalized randomized response on every slot, seeded.
pub fn perturb_rr(s: &Sketch, rp: &RrParams, seed: u64) -> Result<PrivateSketchRr> {
    perturb_rr_with(s, rp, &mut rng_from_seed(seed))
}

pub fn perturb_rr_with<R: Rng + ?Sized>(
    s: &Sketch,
    rp: &RrParams,
    rng: &mut R,
) -> Result<PrivateSketchRr> {
    check_rr_input(s, rp)?;
    let values = s
        .values()
        .iter()
        .map(|&z| GrrCoin::draw(rng, rp.keep_probability, rp.buckets).apply(z))
        .collect();
    Ok(PrivateSketchRr {
        values,
        buckets: rp.buckets,
    })
}

/// Randomized response with externally supplied coins, one per slot.
pub fn perturb_rr_with_coins(s: &Sketch, coins: &[GrrCoin]) -> Result<PrivateSketchRr> {
    if coins.len() != s.len() {
        return Err(Error::LengthMismatch {
            left: s.len(),
            right: coins.len(),
        });
    }
    if let Some(GrrCoin::Flip(pick)) = coins
        .iter()
        .find(|c| matches!(c, GrrCoin::Flip(p) if *p >= s.buckets() - 1))
    {
        return Err(Error::invalid(format!(
            "flip pick {pick} outside 0..{}",
            s.buckets() - 1
        )));
    }
    let values = s.values().iter().zip(coins).map(|(&z, c)| c.apply(z)).collect();
    Ok(PrivateSketchRr {
        values,
        buckets: s.buckets(),
    })
}

/// Inverse-CDF Laplace sample from 64 random bits.
#[inline]
pub fn laplace_from_bits(bits: u64, scale: f64) -> f64 {
    // 53 uniform bits; the upper half mirrors the lower half so that
    // complementary bit patterns give exactly opposite draws
    let v = bits >> 11;
    let half = 1u64 << 52;
    let d = if v < half { v } else { (2 * half - 1) - v };
    let t = (d as f64 + 0.5) / half as f64;
    let magnitude = scale * t.ln();
    if v < half {
        magnitude
    } else {
        -magnitude
    }
}

fn check_scale(scale: f64) -> Result<()> {
    if scale > 0.0 && scale.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("Laplace scale must be positive, got {scale}")))
    }
}

/// One draw from `Lap(scale)`.
pub fn sample_laplace(scale: f64, seed: u64) -> Result<f64> {
    check_scale(scale)?;
    Ok(laplace_from_bits(rng_from_seed(seed).random(), scale))
}

/// `count` independent draws from `Lap(scale)`.
pub fn laplace_noise<R: Rng + ?Sized>(rng: &mut R, scale: f64, count: usize) -> Result<Vec<f64>> {
    check_scale(scale)?;
    Ok((0..count).map(|_| laplace_from_bits(rng.random(), scale)).collect())
}

/// Adds independent `Lap(scale)` noise to every slot, seeded.
pub fn perturb_laplace(s: &Sketch, lp: &LapParams, seed: u64) -> Result<PrivateSketchLap> {
    perturb_laplace_with(s, lp, &mut rng_from_seed(seed))
}

pub fn perturb_laplace_with<R: Rng + ?Sized>(
    s: &Sketch,
    lp: &LapParams,
    rng: &mut R,
) -> Result<PrivateSketchLap> {
    if s.len() != lp.num_functions {
        return Err(Error::LengthMismatch {
            left: s.len(),
            right: lp.num_functions,
        });
    }
    let noise = laplace_noise(rng, lp.scale, s.len())?;
    perturb_laplace_with_noise(s, &noise)
}

/// Adds externally supplied noise values, one per slot.
pub fn perturb_laplace_with_noise(s: &Sketch, noise: &[f64]) -> Result<PrivateSketchLap> {
    if noise.len() != s.len() {
        return Err(Error::LengthMismatch {
            left: s.len(),
            right: noise.len(),
        });
    }
    let values = s
        .values()
        .iter()
        .zip(noise)
        .map(|(&z, &n)| z as f64 + n)
        .collect();
    PrivateSketchLap::from_values(values)
}

/// `ln(K / delta_fail) * scale`: with probability at least `1 - delta_fail`
/// no coordinate of a length-K `Lap(scale)` vector exceeds this magnitude.
pub fn max_noise_bound(num_functions: usize, delta_fail: f64, scale: f64) -> Result<f64> {
    if num_functions == 0 {
        return Err(Error::invalid("K must be positive"));
    }
    if !(delta_fail > 0.0 && delta_fail <= 1.0) {
        return Err(Error::invalid(format!("delta_fail must lie in (0, 1], got {delta_fail}")));
    }
    check_scale(scale)?;
    Ok((num_functions as f64 / delta_fail).ln() * scale)
}
