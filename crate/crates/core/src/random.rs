//! Counter-based randomness and output-key hashing.
//!
//! Every random quantity is a pure function of `(seed, ordinal, replica)`.
//! There is no shared generator, so mapping is reproducible across runs and
//! can be split over shards without coordination.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use xxhash_rust::xxh3::xxh3_64_with_seed;

use crate::error::{invalid, Result};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const RANK_SALT: u64 = 0x5851_f42d_4c95_7f2d;
const STREAM_SALT: u64 = 0x2545_f491_4f6c_dd1d;

/// SplitMix64 finalizer. A bijection on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Maps 64 random bits to a uniform draw in the open interval (0, 1).
#[inline]
pub fn unit_open(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Identifies one input element for randomness purposes: a shard nonce plus
/// the arrival index within that shard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ordinal {
    pub shard: u64,
    pub index: u64,
}

impl Ordinal {
    pub const fn new(shard: u64, index: u64) -> Self {
        Self { shard, index }
    }
}

impl From<u64> for Ordinal {
    fn from(index: u64) -> Self {
        Self { shard: 0, index }
    }
}

/// Deterministic source of per-element, per-replica draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomnessSource {
    seed: u64,
    base: u64,
}

impl RandomnessSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            base: mix64(seed ^ GOLDEN),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    fn element_state(&self, ordinal: Ordinal) -> u64 {
        mix64(mix64(self.base ^ ordinal.shard.wrapping_mul(GOLDEN)) ^ ordinal.index)
    }

    /// Uniform draw in (0, 1) for replica `replica` of element `ordinal`.
    #[inline]
    pub fn uniform(&self, ordinal: Ordinal, replica: u32) -> f64 {
        let s = self.element_state(ordinal);
        unit_open(mix64(s.wrapping_add((replica as u64 + 1).wrapping_mul(GOLDEN))))
    }

    /// `Exp(rate)` draw for replica `replica` of element `ordinal`.
    #[inline]
    pub fn exp(&self, ordinal: Ordinal, replica: u32, rate: f64) -> Result<f64> {
        exp_draw(self.uniform(ordinal, replica), rate)
    }

    /// A generator seeded from the element alone, for samplers that consume a
    /// variable number of draws per element.
    pub fn stream(&self, ordinal: Ordinal) -> Xoshiro256PlusPlus {
        Xoshiro256PlusPlus::seed_from_u64(self.element_state(ordinal) ^ STREAM_SALT)
    }
}

/// Inverse-CDF exponential draw: `-ln(u) / rate`.
#[inline]
pub fn exp_draw(u: f64, rate: f64) -> Result<f64> {
    if !(rate.is_finite() && rate > 0.0) {
        return Err(invalid(format!("exponential rate must be positive, got {rate}")));
    }
    if !(u > 0.0 && u < 1.0) {
        return Err(invalid(format!("uniform draw must lie in (0,1), got {u}")));
    }
    Ok(-u.ln() / rate)
}

/// The `H_i` family: hashes `(key, replica)` to a 64-bit output key, and each
/// output key to its own uniform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutKeyHasher {
    seed: u64,
}

impl OutKeyHasher {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    #[inline]
    pub fn key_hash(&self, key: &[u8]) -> u64 {
        xxh3_64_with_seed(key, self.seed)
    }

    /// Output key from a precomputed key hash. Injective in `replica` for a
    /// fixed key.
    #[inline]
    pub fn outkey_from_hash(key_hash: u64, replica: u32) -> u64 {
        mix64(key_hash.wrapping_add((replica as u64).wrapping_mul(GOLDEN)))
    }

    #[inline]
    pub fn outkey(&self, key: &[u8], replica: u32) -> u64 {
        Self::outkey_from_hash(self.key_hash(key), replica)
    }
}

/// Uniform in (0, 1) attached to an output key, shared by every sketch built
/// with the same `seed`.
#[inline]
pub fn outkey_uniform(outkey: u64, seed: u64) -> f64 {
    unit_open(mix64(outkey ^ mix64(seed ^ RANK_SALT)))
}
