//! Synthetic user pairs with a prescribed size and Jaccard similarity.

use rand::seq::{index, SliceRandom};

use crate::error::{Error, Result};
use crate::seed::rng_from_seed;
use crate::sketching::UserVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSpec {
    pub universe: u32,
    pub tau: u32,
    pub j_target: f64,
    pub seed: u64,
}

/// Intersection size `round(2 tau J / (1 + J))` (half away from zero)
/// closest to the target similarity for two sets of size `tau`.
pub fn intersection_size(tau: u32, j_target: f64) -> u32 {
    let i = (2.0 * tau as f64 * j_target / (1.0 + j_target)).round() as u32;
    i.min(tau)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPair {
    pub x: UserVector,
    pub y: UserVector,
    /// `i / (2 tau - i)`, the exact similarity of the generated pair.
    pub j_realized: f64,
}

/// Two `tau`-sets sharing exactly [`intersection_size`] items.
///
/// The union is a uniform random subset of the universe and the shared part
/// a uniform subset of the union.
pub fn gen_pair(spec: &PairSpec) -> Result<SyntheticPair> {
    if spec.tau == 0 {
        return Err(Error::invalid("tau must be positive"));
    }
    if !(spec.j_target > 0.0 && spec.j_target <= 1.0) {
        return Err(Error::invalid(format!(
            "target similarity must lie in (0, 1], got {}",
            spec.j_target
        )));
    }
    let tau = spec.tau as usize;
    let shared = intersection_size(spec.tau, spec.j_target) as usize;
    let union = 2 * tau - shared;
    if (spec.universe as usize) < union {
        return Err(Error::UniverseTooSmall {
            universe: spec.universe,
            needed: union as u64,
        });
    }

    let mut rng = rng_from_seed(spec.seed);
    let mut items: Vec<u32> = index::sample(&mut rng, spec.universe as usize, union)
        .into_iter()
        .map(|i| i as u32)
        .collect();
    items.shuffle(&mut rng);

    let (common, rest) = items.split_at(shared);
    let (only_x, only_y) = rest.split_at(tau - shared);
    let x = UserVector::new(common.iter().chain(only_x).copied(), spec.universe)?;
    let y = UserVector::new(common.iter().chain(only_y).copied(), spec.universe)?;
    Ok(SyntheticPair {
        x,
        y,
        j_realized: shared as f64 / union as f64,
    })
}

/// Exact `|x ∩ y| / |x ∪ y|`.
pub fn true_jaccard(x: &UserVector, y: &UserVector) -> Result<f64> {
    let (common, union) = x.overlap(y);
    if union == 0 {
        return Err(Error::BothEmpty);
    }
    Ok(common as f64 / union as f64)
}
