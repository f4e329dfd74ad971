//! Range-B MinHash families and user sketches.
//!
//! A range-B MinHash function is a MinHash function composed with a hash
//! into `B` buckets. Two sets with Jaccard similarity `J` collide under a
//! random such function with probability `(1 - J) / B + J`.
//!
//! The min-wise stage is the argmin of a keyed 64-bit hash over the item
//! set, not a stored permutation of the universe. Hash ties are broken by
//! the smaller item index. The bucket stage rehashes the winning item with
//! an independent key and reduces with a multiply-high, which avoids modulo
//! bias.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{mix64, split, GOLDEN_GAMMA};

/// A user's item set over a universe `[0, m)`.
///
/// Items are kept sorted and deduplicated, so the order in which they were
/// supplied never matters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UserVector {
    items: Vec<u32>,
    universe: u32,
}

impl UserVector {
    pub fn new<I>(items: I, universe: u32) -> Result<Self>
    where
        I: IntoIterator<Item = u32>,
    {
        if universe == 0 {
            return Err(Error::invalid("universe size must be positive"));
        }
        let mut items: Vec<u32> = items.into_iter().collect();
        if let Some(&item) = items.iter().find(|&&i| i >= universe) {
            return Err(Error::ItemOutOfRange { item, universe });
        }
        items.sort_unstable();
        items.dedup();
        Ok(UserVector { items, universe })
    }

    pub fn items(&self) -> &[u32] {
        &self.items
    }

    pub fn universe(&self) -> u32 {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, item: u32) -> bool {
        self.items.binary_search(&item).is_ok()
    }

    /// Sizes of the intersection and the union with `other`.
    pub fn overlap(&self, other: &UserVector) -> (usize, usize) {
        let (a, b) = (&self.items, &other.items);
        let (mut i, mut j, mut common) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    common += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        (common, a.len() + b.len() - common)
    }
}

/// `K` seeded range-B MinHash functions shared by all users.
///
/// Fully determined by `(K, B, m, master_seed)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashFamily {
    buckets: u32,
    universe: u32,
    master_seed: u64,
    minwise_keys: Vec<u64>,
    bucket_keys: Vec<u64>,
}

impl HashFamily {
    pub fn new(num_functions: usize, buckets: u32, universe: u32, master_seed: u64) -> Result<Self> {
        if num_functions == 0 {
            return Err(Error::invalid("need at least one hash function (K >= 1)"));
        }
        if buckets < 2 {
            return Err(Error::invalid("range-B MinHash requires B >= 2"));
        }
        if universe == 0 {
            return Err(Error::invalid("universe size must be positive"));
        }
        let slot_key = |slot: usize, stage: u64| split(master_seed, 2 * slot as u64 + stage);
        Ok(HashFamily {
            buckets,
            universe,
            master_seed,
            minwise_keys: (0..num_functions).map(|s| slot_key(s, 0)).collect(),
            bucket_keys: (0..num_functions).map(|s| slot_key(s, 1)).collect(),
        })
    }

    pub fn num_functions(&self) -> usize {
        self.minwise_keys.len()
    }

    pub fn buckets(&self) -> u32 {
        self.buckets
    }

    pub fn universe(&self) -> u32 {
        self.universe
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// The item of `x` that comes first in the keyed order of `slot`.
    pub fn minwise_value(&self, slot: usize, x: &UserVector) -> Result<u32> {
        let key = *self.minwise_keys.get(slot).ok_or_else(|| {
            Error::invalid(format!("slot {slot} out of range for K = {}", self.num_functions()))
        })?;
        self.check_universe(x)?;
        argmin_item(key, x.items()).ok_or(Error::EmptySet)
    }

    /// Maps an item of the universe to its bucket under `slot`.
    pub fn bucket_of(&self, slot: usize, item: u32) -> u32 {
        reduce(keyed_hash(self.bucket_keys[slot], item), self.buckets)
    }

    /// The range-B MinHash sketch `(h_1(x), ..., h_K(x))`.
    pub fn sketch(&self, x: &UserVector) -> Result<Sketch> {
        self.check_universe(x)?;
        if x.is_empty() {
            return Err(Error::EmptySet);
        }
        let values = self
            .minwise_keys
            .iter()
            .zip(&self.bucket_keys)
            .map(|(&mk, &bk)| {
                let winner = argmin_item(mk, x.items()).expect("non-empty");
                reduce(keyed_hash(bk, winner), self.buckets)
            })
            .collect();
        Ok(Sketch {
            values,
            buckets: self.buckets,
        })
    }

    fn check_universe(&self, x: &UserVector) -> Result<()> {
        match x.items().last() {
            Some(&item) if item >= self.universe => Err(Error::ItemOutOfRange {
                item,
                universe: self.universe,
            }),
            _ => Ok(()),
        }
    }
}

#[inline]
fn keyed_hash(key: u64, item: u32) -> u64 {
    mix64(key.wrapping_add((item as u64).wrapping_mul(GOLDEN_GAMMA)))
}

#[inline]
fn reduce(hash: u64, buckets: u32) -> u32 {
    ((hash as u128 * buckets as u128) >> 64) as u32
}

fn argmin_item(key: u64, items: &[u32]) -> Option<u32> {
    // items are sorted, so a strict `<` keeps the smaller item on hash ties
    let mut iter = items.iter();
    let &first = iter.next()?;
    let mut best = (keyed_hash(key, first), first);
    for &item in iter {
        let h = keyed_hash(key, item);
        if h < best.0 {
            best = (h, item);
        }
    }
    Some(best.1)
}

/// Bucket values `x* = (h_1(x), ..., h_K(x))`, each in `[0, B)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sketch {
    values: Vec<u32>,
    buckets: u32,
}

impl Sketch {
    /// Builds a sketch from explicit bucket values.
    pub fn from_values(values: Vec<u32>, buckets: u32) -> Result<Self> {
        validate_buckets(&values, buckets)?;
        Ok(Sketch { values, buckets })
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

    /// Number of slots in which the two sketches differ.
    pub fn hamming(&self, other: &Sketch) -> Result<usize> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(self.values.iter().zip(&other.values).filter(|(a, b)| a != b).count())
    }

    pub fn to_text(&self) -> String {
        join_values(&self.values)
    }

    pub fn from_text(line: &str, buckets: u32) -> Result<Self> {
        Self::from_values(parse_values(line)?, buckets)
    }

    /// One byte per slot when `B <= 256`, otherwise four little-endian bytes.
    pub fn to_compact_bytes(&self) -> Vec<u8> {
        encode_compact(&self.values, self.buckets)
    }

    pub fn from_compact_bytes(bytes: &[u8], buckets: u32) -> Result<Self> {
        Self::from_values(decode_compact(bytes, buckets)?, buckets)
    }
}

pub(crate) fn validate_buckets(values: &[u32], buckets: u32) -> Result<()> {
    if buckets < 2 {
        return Err(Error::invalid("range-B MinHash requires B >= 2"));
    }
    match values.iter().find(|&&v| v >= buckets) {
        Some(&value) => Err(Error::BucketOutOfRange { value, buckets }),
        None => Ok(()),
    }
}

pub(crate) fn join_values(values: &[u32]) -> String {
    values.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

pub(crate) fn parse_values(line: &str) -> Result<Vec<u32>> {
    let line = line.trim();
    if line.is_empty() {
        return Ok(Vec::new());
    }
    line.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<u32>()
                .map_err(|e| Error::Format(format!("bad sketch value {tok:?}: {e}")))
        })
        .collect()
}

pub(crate) fn encode_compact(values: &[u32], buckets: u32) -> Vec<u8> {
    if buckets <= 256 {
        values.iter().map(|&v| v as u8).collect()
    } else {
        values.iter().flat_map(|v| v.to_le_bytes()).collect()
    }
}

pub(crate) fn decode_compact(bytes: &[u8], buckets: u32) -> Result<Vec<u32>> {
    if buckets <= 256 {
        return Ok(bytes.iter().map(|&b| b as u32).collect());
    }
    if !bytes.len().is_multiple_of(4) {
        return Err(Error::Format(format!(
            "compact sketch of {} bytes is not a whole number of 4-byte values",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}
