use super::PipelineConfig;
use crate::element::Element;
use crate::error::{Error, Result};
use crate::mappers::{Mapper, OutputElement};
use crate::random::Ordinal;
use crate::sketches::{AllThresholdSketch, Reader, SumCounter, Writer};
use crate::transforms::{CoefficientFunction, SignedCoefficientFunction};

/// Full-range measurement: one all-threshold sketch answers point queries
/// at every `t` and combination queries for every `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct FullRangePipeline {
    cfg: PipelineConfig,
    mapper: Mapper,
    at: AllThresholdSketch,
    sum: SumCounter,
    elements: u64,
}

impl FullRangePipeline {
    pub fn new(cfg: PipelineConfig) -> Result<Self> {
        Ok(Self {
            cfg,
            mapper: Mapper::new(cfg.r, cfg.seed)?,
            at: AllThresholdSketch::new(cfg.k, cfg.seed)?,
            sum: SumCounter::new(),
            elements: 0,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn sketch(&self) -> &AllThresholdSketch {
        &self.at
    }

    pub fn sum(&self) -> &SumCounter {
        &self.sum
    }

    pub fn elements(&self) -> u64 {
        self.elements
    }

    pub fn ingest(&mut self, e: &Element, ordinal: Ordinal) -> Result<()> {
        self.elements += 1;
        self.sum.add(e.value())?;
        let mapper = self.mapper;
        let mut res = Ok(());
        mapper.full_range(e, ordinal, |o| {
            if res.is_ok() {
                res = self.at.update_output(&o);
            }
        })?;
        res
    }

    /// Ingests a raw output element; its value is the draw `y`.
    pub fn ingest_output(&mut self, o: OutputElement) -> Result<()> {
        self.at.update_output(&o)
    }

    pub fn merge(&self, other: &Self) -> Result<Self> {
        self.cfg.check_same(&other.cfg)?;
        Ok(Self {
            at: self.at.merge(&other.at)?,
            sum: self.sum.merge(&other.sum)?,
            elements: self.elements + other.elements,
            ..self.clone()
        })
    }

    /// `T̂dCount_t / r`, without fallback.
    pub fn measurement(&self, t: f64) -> f64 {
        self.at.estimate(t) / self.cfg.r as f64
    }

    /// Estimate of `LapM[W](t)` with the `t · SUM` fallback below `3ε^{-2}`
    /// estimated output keys.
    pub fn estimate(&self, t: f64) -> f64 {
        if self.at.estimate(t) < self.cfg.fallback_threshold() {
            t * self.sum.value()
        } else {
            self.measurement(t)
        }
    }

    /// `∫ a(t) L̂(t) dt`, where `L̂` is the threshold measurement from the
    /// first breakpoint `τ*` whose estimate reaches `3ε^{-2}` (or the last
    /// breakpoint, if none does) and `t · SUM` below `τ*`. The measurement
    /// is a step function, so the integral is a finite sum of tail
    /// differences.
    pub fn combination(&self, a: &CoefficientFunction) -> Result<f64> {
        let profile = self.at.profile();
        let Some(&(last_y, _)) = profile.last() else {
            return Ok(0.0);
        };
        let threshold = self.cfg.fallback_threshold();
        let start = profile.iter().position(|&(_, est)| est >= threshold).unwrap_or(profile.len() - 1);
        let tau_star = profile[start].0;
        debug_assert!(tau_star <= last_y);
        let r = self.cfg.r as f64;
        let mut total = self.sum.value() * a.head_integral_below(tau_star)?;
        let mut upper = 0.0;
        for j in (start..profile.len()).rev() {
            let (y, est) = profile[j];
            let lower = a.tail_integral(y)?;
            total += est / r * (lower - upper);
            upper = lower;
        }
        Ok(total)
    }

    /// Returns `(plus part + linear · SUM, minus part)` for a signed
    /// transform.
    pub fn signed_parts(&self, a: &SignedCoefficientFunction) -> Result<(f64, f64)> {
        let plus = self.combination(&a.plus)? + a.linear * self.sum.value();
        let minus = if a.minus.is_zero() { 0.0 } else { self.combination(&a.minus)? };
        Ok((plus, minus))
    }

    pub(crate) fn write(&self, w: &mut Writer) {
        w.u64(self.elements);
        w.bytes(&self.at.to_bytes());
        w.bytes(&self.sum.to_bytes());
    }

    pub(crate) fn read(cfg: PipelineConfig, r: &mut Reader<'_>) -> Result<Self> {
        let mut out = Self::new(cfg).map_err(|e| Error::Decode(e.to_string()))?;
        out.elements = r.u64()?;
        out.at = AllThresholdSketch::from_bytes(r.bytes()?)?;
        out.sum = SumCounter::from_bytes(r.bytes()?)?;
        if out.at.k() != cfg.k || out.at.seed() != cfg.seed {
            return Err(Error::Decode("embedded sketch does not match the configuration".into()));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::{inverse_transform, Statistic};

    #[test]
    fn empty_is_zero() {
        let p = FullRangePipeline::new(PipelineConfig::new(3, 0.5, 32, 0).unwrap()).unwrap();
        assert_eq!(p.estimate(1.0), 0.0);
        let a = inverse_transform(&Statistic::Sqrt).unwrap();
        assert_eq!(p.combination(&a).unwrap(), 0.0);
    }

    #[test]
    fn all_keys_above_all_draws() {
        // 40 keys × 3 replicas = 120 outkeys, below k; threshold 12.
        let cfg = PipelineConfig::new(3, 0.5, 256, 5).unwrap();
        let mut p = FullRangePipeline::new(cfg).unwrap();
        for i in 0..40u64 {
            p.ingest(&Element::new(i.to_le_bytes().to_vec(), 1.0).unwrap(), i.into()).unwrap();
        }
        assert_eq!(p.estimate(1e9), 40.0);
    }

    #[test]
    fn soft_cap_delta_is_scaled_threshold_query() {
        let cfg = PipelineConfig::new(8, 0.5, 64, 5).unwrap();
        let mut p = FullRangePipeline::new(cfg).unwrap();
        for i in 0..300u64 {
            let e = Element::new((i % 90).to_le_bytes().to_vec(), 1.0 + (i % 4) as f64).unwrap();
            p.ingest(&e, i.into()).unwrap();
        }
        let t = 4.0;
        let a = inverse_transform(&Statistic::SoftCap { t }).unwrap();
        let want = t * p.estimate(1.0 / t);
        assert!((p.combination(&a).unwrap() - want).abs() <= 1e-12 * want);
    }
}
