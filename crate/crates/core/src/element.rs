//! Input elements and their aggregated frequency distribution.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};

/// A raw input record: an opaque key and a positive value.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    key: Vec<u8>,
    value: f64,
}

impl Element {
    pub fn new(key: impl Into<Vec<u8>>, value: f64) -> Result<Self> {
        let key = key.into();
        if key.is_empty() {
            return Err(Error::InvalidElement("empty key".into()));
        }
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidElement(format!(
                "value must be positive and finite, got {value}"
            )));
        }
        Ok(Self { key, value })
    }

    /// An element with value 1.
    pub fn unit(key: impl Into<Vec<u8>>) -> Result<Self> {
        Self::new(key, 1.0)
    }

    pub fn key(&self) -> &[u8] {
        &self.key
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

/// Histogram of key weights: weight `w` maps to the number of keys whose
/// values sum to exactly `w`.
///
/// Weights are kept in a `BTreeMap` keyed by their IEEE bit pattern, which
/// orders positive finite floats correctly.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyDistribution {
    entries: BTreeMap<u64, u64>,
}

impl FrequencyDistribution {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a distribution from `(weight, count)` pairs. Repeated weights
    /// accumulate; zero counts are skipped.
    pub fn from_counts<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, u64)>,
    {
        let mut dist = Self::new();
        for (w, c) in pairs {
            dist.add(w, c)?;
        }
        Ok(dist)
    }

    pub fn add(&mut self, weight: f64, count: u64) -> Result<()> {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "weight must be positive and finite, got {weight}"
            )));
        }
        if count > 0 {
            *self.entries.entry(weight.to_bits()).or_insert(0) += count;
        }
        Ok(())
    }

    /// `(weight, count)` pairs in increasing weight order.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (f64, u64)> + '_ {
        self.entries.iter().map(|(&b, &c)| (f64::from_bits(b), c))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of distinct keys.
    pub fn distinct(&self) -> u64 {
        self.entries.values().sum()
    }

    /// Sum of all key weights.
    pub fn sum(&self) -> f64 {
        self.iter().map(|(w, c)| w * c as f64).sum()
    }

    pub fn max_weight(&self) -> Option<f64> {
        self.iter().next_back().map(|(w, _)| w)
    }

    pub fn min_weight(&self) -> Option<f64> {
        self.iter().next().map(|(w, _)| w)
    }

    /// `Σ count · f(w)`.
    pub fn statistic<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.iter().map(|(w, c)| c as f64 * f(w)).sum()
    }
}

/// Sums values per key and histograms the resulting weights.
///
/// Each key's values are summed in sorted order so that the result does not
/// depend on arrival order even for non-integral values.
pub fn aggregate<'a, I>(elements: I) -> FrequencyDistribution
where
    I: IntoIterator<Item = &'a Element>,
{
    let mut per_key: HashMap<&'a [u8], Vec<f64>> = HashMap::new();
    for e in elements {
        per_key.entry(e.key()).or_default().push(e.value());
    }
    let mut dist = FrequencyDistribution::new();
    for mut values in per_key.into_values() {
        values.sort_by(f64::total_cmp);
        let w: f64 = values.iter().sum();
        dist.add(w, 1).expect("sums of positive values are positive");
    }
    dist
}
