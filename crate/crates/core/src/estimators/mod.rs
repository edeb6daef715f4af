//! Measurement pipelines: element mapping followed by sketching, and the
//! final estimators built on top of them.

mod combination;
mod full_range;
mod pipeline;
mod point;
mod signed;

pub use combination::{CombinationPipeline, SignedCombinationPipeline};
pub use full_range::FullRangePipeline;
pub use pipeline::{Mode, Pipeline};
pub use point::{PointPipeline, Sampling, SignedPointPipeline};
pub use signed::{signed_estimate, SignedEstimate};

use crate::error::{invalid, Error, Result};

/// Parameters shared by all pipelines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    /// Replicas per element.
    pub r: u32,
    /// Target relative error; sets the fallback threshold and the sidelined
    /// set size.
    pub epsilon: f64,
    /// Sketch size.
    pub k: u32,
    pub seed: u64,
}

impl PipelineConfig {
    pub fn new(r: u32, epsilon: f64, k: u32, seed: u64) -> Result<Self> {
        if r == 0 {
            return Err(invalid("replica count must be at least 1"));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(invalid(format!("epsilon must lie in (0,1), got {epsilon}")));
        }
        if k < 2 {
            return Err(invalid(format!("k must be at least 2, got {k}")));
        }
        Ok(Self { r, epsilon, k, seed })
    }

    /// `3 ε^{-2}`: below this many estimated output keys, point estimates
    /// fall back to `t · SUM`.
    pub fn fallback_threshold(&self) -> f64 {
        3.0 / (self.epsilon * self.epsilon)
    }

    /// `⌈3 ε^{-2}⌉`.
    pub fn sideline_capacity(&self) -> usize {
        self.fallback_threshold().ceil() as usize
    }

    pub(crate) fn check_same(&self, other: &Self) -> Result<()> {
        let diff = |what: &str, a: String, b: String| {
            Err(Error::Incompatible(format!("{what} differs ({a} vs {b})")))
        };
        if self.r != other.r {
            return diff("r", self.r.to_string(), other.r.to_string());
        }
        if self.epsilon.to_bits() != other.epsilon.to_bits() {
            return diff("epsilon", self.epsilon.to_string(), other.epsilon.to_string());
        }
        if self.k != other.k {
            return diff("k", self.k.to_string(), other.k.to_string());
        }
        if self.seed != other.seed {
            return diff("seed", self.seed.to_string(), other.seed.to_string());
        }
        Ok(())
    }
}
