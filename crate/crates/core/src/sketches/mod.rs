//! Mergeable summaries: bottom-k distinct and max-distinct counters, the
//! all-threshold sketch and an exact sum counter.
//!
//! Every sketch serializes to a versioned little-endian byte string whose
//! entries are written in canonical order, so two sketches holding the same
//! logical content encode to the same bytes.

mod all_threshold;
mod codec;
mod distinct;
mod max_distinct;
mod sum;

pub use all_threshold::{AllThresholdSketch, ThresholdEntry};
pub use codec::SketchType;
pub use distinct::{DistinctCounter, DistinctEntry};
pub use max_distinct::{MaxDistinctEntry, MaxDistinctSketch};
pub use sum::SumCounter;

pub(crate) use codec::{Reader, Writer};

use crate::error::{Error, Result};
use crate::random::outkey_uniform;

/// `-ln u` for the outkey's uniform under `seed`.
#[inline]
pub fn outkey_rank(outkey: u64, seed: u64) -> f64 {
    -outkey_uniform(outkey, seed).ln()
}

/// Rank-conditioning estimate from the `k - 1` smallest-rank entries and the
/// `k`-th smallest rank `tau`: `Σ m / (1 - e^{-m τ})`.
#[inline]
pub(crate) fn conditioned_weight(m: f64, tau: f64) -> f64 {
    m / -(-m * tau).exp_m1()
}

pub(crate) fn check_k(k: u32) -> Result<()> {
    if k < 2 {
        return Err(crate::error::invalid(format!("k must be at least 2, got {k}")));
    }
    Ok(())
}

pub(crate) fn check_compatible(kind: &str, k: (u32, u32), seed: (u64, u64)) -> Result<()> {
    if k.0 != k.1 {
        return Err(Error::Incompatible(format!("{kind}: k differs ({} vs {})", k.0, k.1)));
    }
    if seed.0 != seed.1 {
        return Err(Error::Incompatible(format!("{kind}: seed differs ({} vs {})", seed.0, seed.1)));
    }
    Ok(())
}
