//! Exact reference computations.

use std::collections::HashMap;

use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::element::{Element, FrequencyDistribution};
use crate::error::{invalid, Result};
use crate::mappers::OutputElement;
use crate::transforms::Statistic;

pub type StatisticSpec = Statistic;

/// `Σ_w W(w) f(w)`.
pub fn exact_statistic(dist: &FrequencyDistribution, spec: &StatisticSpec) -> f64 {
    dist.iter().map(|(w, c)| c as f64 * spec.value(w)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasurementMode {
    /// Number of distinct outkeys.
    Distinct,
    /// `Σ_x m_x`, the sum over outkeys of their largest value.
    MaxDistinct,
    /// Number of outkeys with some value at most `t`.
    Threshold(f64),
}

pub fn exact_measurement(outputs: &[OutputElement], mode: MeasurementMode) -> f64 {
    match mode {
        MeasurementMode::Distinct => {
            let mut keys: Vec<u64> = outputs.iter().map(|o| o.outkey).collect();
            keys.sort_unstable();
            keys.dedup();
            keys.len() as f64
        }
        MeasurementMode::MaxDistinct => {
            let mut best: HashMap<u64, f64> = HashMap::with_capacity(outputs.len());
            for o in outputs {
                let m = best.entry(o.outkey).or_insert(o.value);
                *m = m.max(o.value);
            }
            best.values().sum()
        }
        MeasurementMode::Threshold(t) => {
            let mut keys: Vec<u64> = outputs.iter().filter(|o| o.value <= t).map(|o| o.outkey).collect();
            keys.sort_unstable();
            keys.dedup();
            keys.len() as f64
        }
    }
}

/// Key universe of a truncated Zipf law: key `i` (1-based) has probability
/// proportional to `i^{-α}`. Keys are the little-endian bytes of `i`.
#[derive(Debug, Clone)]
pub struct Zipf {
    alpha: f64,
    index: WeightedIndex<f64>,
}

/// Default size of the key universe.
pub const ZIPF_KEYS: usize = 1_000_000;

impl Zipf {
    pub fn new(alpha: f64, n_keys: usize) -> Result<Self> {
        if !(alpha > 0.0 && !alpha.is_nan()) {
            return Err(invalid(format!("alpha must be positive, got {alpha}")));
        }
        if n_keys == 0 {
            return Err(invalid("key universe must be nonempty"));
        }
        let weights = (1..=n_keys).map(|i| (i as f64).powf(-alpha));
        let index = WeightedIndex::new(weights).map_err(|e| invalid(format!("zipf weights: {e}")))?;
        Ok(Self { alpha, index })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// 1-based key rank.
    pub fn sample_rank<R: rand::Rng>(&self, rng: &mut R) -> u64 {
        self.index.sample(rng) as u64 + 1
    }

    pub fn generate(&self, n_elements: usize, seed: u64) -> Vec<Element> {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        (0..n_elements)
            .map(|_| Element::unit(self.sample_rank(&mut rng).to_le_bytes().to_vec()).expect("nonempty key"))
            .collect()
    }
}

/// `n_elements` unit-valued elements with Zipf(α) keys over `n_keys` ranks.
pub fn zipf_generate(n_elements: usize, alpha: f64, n_keys: usize, seed: u64) -> Result<Vec<Element>> {
    Ok(Zipf::new(alpha, n_keys)?.generate(n_elements, seed))
}

/// Decodes a key produced by [`zipf_generate`].
pub fn zipf_rank(key: &[u8]) -> Option<u64> {
    Some(u64::from_le_bytes(key.try_into().ok()?))
}
