//! Composable sketches for concave sublinear frequency statistics.
//!
//! A data set of `(key, value)` elements aggregates to per-key frequencies
//! `w_x`. The statistics handled here are `Σ_x f(w_x)` for concave
//! sublinear `f`: soft and hard caps, low moments, `ln(1 + w)` and similar.
//! Each element is mapped to output elements whose distinct or max-distinct
//! count, sketched with a bottom-k sketch, estimates the complement-Laplace
//! transform of the frequencies; combining transforms with a coefficient
//! function gives the statistic.

pub mod bench;
pub mod element;
pub mod error;
pub mod estimators;
pub mod mappers;
pub mod oracle;
pub mod random;
pub mod sketches;
pub mod transforms;

pub use element::{Element, FrequencyDistribution};
pub use error::{Error, Result};
