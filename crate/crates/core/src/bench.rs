//! Soft-cap point experiments on Zipf data.

use std::collections::HashMap;

use crate::element::{aggregate, Element};
use crate::error::{invalid, Result};
use crate::mappers::Mapper;
use crate::oracle::Zipf;
use crate::random::{mix64, Ordinal};
use crate::sketches::DistinctCounter;
use crate::transforms::laplace_c;

#[derive(Debug, Clone, PartialEq)]
pub struct PointBenchParams {
    pub alphas: Vec<f64>,
    pub caps: Vec<f64>,
    pub replicas: Vec<u32>,
    pub k: u32,
    pub n_elements: usize,
    pub n_keys: usize,
    pub reps: u32,
    pub seed: u64,
}

/// One configuration: exact `T · LapM[W](1/T)` and the spread of the exact
/// measurement `T · dCount / r` and of its sketched version.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub alpha: f64,
    pub cap: f64,
    pub r: u32,
    pub k: u32,
    pub exact_value: f64,
    pub mean_est: f64,
    pub nrmse_measurement: f64,
    pub nrmse_approx: f64,
}

impl BenchRow {
    pub const HEADER: [&'static str; 8] =
        ["alpha", "T", "r", "k", "exact_value", "mean_est", "NRMSE_measurement", "NRMSE_approx"];

    pub fn record(&self) -> [String; 8] {
        [
            self.alpha.to_string(),
            self.cap.to_string(),
            self.r.to_string(),
            self.k.to_string(),
            self.exact_value.to_string(),
            self.mean_est.to_string(),
            self.nrmse_measurement.to_string(),
            self.nrmse_approx.to_string(),
        ]
    }
}

/// A dataset with keys interned to dense indices.
struct Dataset {
    elements: Vec<Element>,
    slots: Vec<u32>,
    keys: usize,
}

impl Dataset {
    fn new(elements: Vec<Element>) -> Self {
        let mut index: HashMap<&[u8], u32> = HashMap::new();
        let slots = elements
            .iter()
            .map(|e| {
                let next = index.len() as u32;
                *index.entry(e.key()).or_insert(next)
            })
            .collect();
        let keys = index.len();
        Self { elements, slots, keys }
    }
}

/// Seed of repetition `rep`; shared by every `(α, T, r)`.
pub fn rep_seed(base: u64, rep: u32) -> u64 {
    mix64(base ^ mix64(rep as u64 + 1))
}

/// Seed of the dataset for `α`.
pub fn data_seed(base: u64, alpha: f64) -> u64 {
    mix64(base ^ alpha.to_bits())
}

/// Runs one `(dataset, T, r)` configuration.
pub fn run_config(elements: &[Element], cap: f64, r: u32, k: u32, reps: u32, seed: u64) -> Result<BenchRow> {
    let data = Dataset::new(elements.to_vec());
    run_on(&data, f64::NAN, cap, r, k, reps, seed)
}

fn run_on(data: &Dataset, alpha: f64, cap: f64, r: u32, k: u32, reps: u32, seed: u64) -> Result<BenchRow> {
    if !(cap > 0.0 && cap.is_finite()) || reps == 0 {
        return Err(invalid("cap must be positive and reps nonzero"));
    }
    let t = 1.0 / cap;
    let exact = cap * laplace_c(&aggregate(&data.elements), t)?;
    let words = (r as usize).div_ceil(64);
    let mut seen = vec![0u64; data.keys * words];
    let (mut sum_est, mut sq_meas, mut sq_approx) = (0.0, 0.0, 0.0);
    for rep in 0..reps {
        let s = rep_seed(seed, rep);
        let mapper = Mapper::new(r, s)?;
        let mut dc = DistinctCounter::new(k, s)?;
        seen.fill(0);
        let mut count = 0u64;
        for (i, (e, &slot)) in data.elements.iter().zip(&data.slots).enumerate() {
            let base = slot as usize * words;
            mapper.point_fast(e, Ordinal::from(i as u64), t, |j, outkey| {
                let (w, b) = (base + (j / 64) as usize, 1u64 << (j % 64));
                if seen[w] & b == 0 {
                    seen[w] |= b;
                    count += 1;
                }
                dc.update(outkey);
            })?;
        }
        let meas = cap * count as f64 / r as f64;
        let approx = cap * dc.estimate() / r as f64;
        sum_est += approx;
        sq_meas += ((meas - exact) / exact).powi(2);
        sq_approx += ((approx - exact) / exact).powi(2);
    }
    let n = reps as f64;
    Ok(BenchRow {
        alpha,
        cap,
        r,
        k,
        exact_value: exact,
        mean_est: sum_est / n,
        nrmse_measurement: (sq_meas / n).sqrt(),
        nrmse_approx: (sq_approx / n).sqrt(),
    })
}

/// All rows of the grid `alphas × caps × replicas`, in that order.
pub fn run_point_bench(params: &PointBenchParams) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &alpha in &params.alphas {
        let zipf = Zipf::new(alpha, params.n_keys)?;
        let data = Dataset::new(zipf.generate(params.n_elements, data_seed(params.seed, alpha)));
        for &cap in &params.caps {
            for &r in &params.replicas {
                rows.push(run_on(&data, alpha, cap, r, params.k, params.reps, params.seed)?);
            }
        }
    }
    Ok(rows)
}
