use super::PipelineConfig;
use crate::element::Element;
use crate::error::{invalid, Error, Result};
use crate::mappers::Mapper;
use crate::random::Ordinal;
use crate::sketches::{DistinctCounter, Reader, SumCounter, Writer};
use crate::transforms::SignedCoefficientFunction;

/// How point mappings draw replicas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampling {
    /// One exponential draw per replica.
    PerReplica,
    /// Binomial count, then a uniform replica subset.
    #[default]
    Binomial,
}

/// Point measurement of `LapM[W](t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointPipeline {
    cfg: PipelineConfig,
    t: f64,
    sampling: Sampling,
    mapper: Mapper,
    dc: DistinctCounter,
    sum: SumCounter,
    elements: u64,
    outputs: u64,
}

impl PointPipeline {
    pub fn new(cfg: PipelineConfig, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid(format!("point threshold must be positive and finite, got {t}")));
        }
        Ok(Self {
            cfg,
            t,
            sampling: Sampling::default(),
            mapper: Mapper::new(cfg.r, cfg.seed)?,
            dc: DistinctCounter::new(cfg.k, cfg.seed)?,
            sum: SumCounter::new(),
            elements: 0,
            outputs: 0,
        })
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn sketch(&self) -> &DistinctCounter {
        &self.dc
    }

    pub fn sum(&self) -> &SumCounter {
        &self.sum
    }

    pub fn elements(&self) -> u64 {
        self.elements
    }

    pub fn outputs(&self) -> u64 {
        self.outputs
    }

    pub fn ingest(&mut self, e: &Element, ordinal: Ordinal) -> Result<()> {
        self.sum.add(e.value())?;
        self.elements += 1;
        let (dc, outputs) = (&mut self.dc, &mut self.outputs);
        let emit = |_, k| {
            dc.update(k);
            *outputs += 1;
        };
        match self.sampling {
            Sampling::PerReplica => self.mapper.point(e, ordinal, self.t, emit),
            Sampling::Binomial => self.mapper.point_fast(e, ordinal, self.t, emit),
        }
    }

    pub fn merge(&self, other: &Self) -> Result<Self> {
        self.cfg.check_same(&other.cfg)?;
        if self.t.to_bits() != other.t.to_bits() {
            return Err(Error::Incompatible(format!("t differs ({} vs {})", self.t, other.t)));
        }
        Ok(Self {
            dc: self.dc.merge(&other.dc)?,
            sum: self.sum.merge(&other.sum)?,
            elements: self.elements + other.elements,
            outputs: self.outputs + other.outputs,
            ..self.clone()
        })
    }

    /// `d̂Count(E) / r`, without fallback.
    pub fn measurement(&self) -> f64 {
        self.dc.estimate() / self.cfg.r as f64
    }

    /// True when the distinct estimate is below `3 ε^{-2}`.
    pub fn uses_fallback(&self) -> bool {
        self.dc.estimate() < self.cfg.fallback_threshold()
    }

    /// Estimate of `LapM[W](t)`: the measurement, or `t · SUM` when too few
    /// output keys were seen.
    pub fn estimate(&self) -> f64 {
        if self.uses_fallback() {
            self.t * self.sum.value()
        } else {
            self.measurement()
        }
    }

    /// `T · LapM̂[W](1/T)`, for a pipeline built at `t = 1/T`.
    pub fn soft_cap_estimate(&self, cap: f64) -> Result<f64> {
        if !(cap > 0.0) || ((cap * self.t) - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("pipeline threshold {} is not 1/{cap}", self.t)));
        }
        Ok(cap * self.estimate())
    }

    pub(crate) fn write(&self, w: &mut Writer) {
        w.f64(self.t);
        w.u8(self.sampling as u8);
        w.u64(self.elements);
        w.u64(self.outputs);
        w.bytes(&self.dc.to_bytes());
        w.bytes(&self.sum.to_bytes());
    }

    pub(crate) fn read(cfg: PipelineConfig, r: &mut Reader<'_>) -> Result<Self> {
        let t = r.f64()?;
        let sampling = match r.u8()? {
            0 => Sampling::PerReplica,
            1 => Sampling::Binomial,
            other => return Err(Error::Decode(format!("unknown sampling tag {other}"))),
        };
        let mut out = Self::new(cfg, t).map_err(|e| Error::Decode(e.to_string()))?.with_sampling(sampling);
        out.elements = r.u64()?;
        out.outputs = r.u64()?;
        out.dc = DistinctCounter::from_bytes(r.bytes()?)?;
        out.sum = SumCounter::from_bytes(r.bytes()?)?;
        if out.dc.k() != cfg.k || out.dc.seed() != cfg.seed {
            return Err(Error::Decode("embedded sketch does not match the configuration".into()));
        }
        Ok(out)
    }
}

/// Point measurements at every point mass of a discrete signed transform,
/// combined as `Σ m₊ L̂(t₊) - Σ m₋ L̂(t₋) + linear · SUM`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedPointPipeline {
    cfg: PipelineConfig,
    a: SignedCoefficientFunction,
    plus: Vec<(f64, PointPipeline)>,
    minus: Vec<(f64, PointPipeline)>,
    sum: SumCounter,
    elements: u64,
}

impl SignedPointPipeline {
    pub fn new(cfg: PipelineConfig, a: SignedCoefficientFunction, sampling: Sampling) -> Result<Self> {
        if !a.is_discrete() {
            return Err(Error::UnsupportedStatistic(
                "point measurements need a transform made of point masses".into(),
            ));
        }
        let build = |part: &crate::transforms::CoefficientFunction| -> Result<Vec<(f64, PointPipeline)>> {
            part.deltas()
                .iter()
                .map(|d| Ok((d.mass, PointPipeline::new(cfg, d.at)?.with_sampling(sampling))))
                .collect()
        };
        Ok(Self {
            plus: build(&a.plus)?,
            minus: build(&a.minus)?,
            cfg,
            a,
            sum: SumCounter::new(),
            elements: 0,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn transform(&self) -> &SignedCoefficientFunction {
        &self.a
    }

    pub fn components(&self) -> impl Iterator<Item = &PointPipeline> {
        self.plus.iter().chain(self.minus.iter()).map(|(_, p)| p)
    }

    pub fn elements(&self) -> u64 {
        self.elements
    }

    pub fn outputs(&self) -> u64 {
        self.components().map(|p| p.outputs()).sum()
    }

    pub fn sum(&self) -> &SumCounter {
        &self.sum
    }

    pub fn ingest(&mut self, e: &Element, ordinal: Ordinal) -> Result<()> {
        self.sum.add(e.value())?;
        self.elements += 1;
        for (_, p) in self.plus.iter_mut().chain(self.minus.iter_mut()) {
            p.ingest(e, ordinal)?;
        }
        Ok(())
    }

    pub fn merge(&self, other: &Self) -> Result<Self> {
        self.cfg.check_same(&other.cfg)?;
        if self.plus.len() != other.plus.len() || self.minus.len() != other.minus.len() {
            return Err(Error::Incompatible("different transforms".into()));
        }
        let zip = |a: &[(f64, PointPipeline)], b: &[(f64, PointPipeline)]| -> Result<Vec<(f64, PointPipeline)>> {
            a.iter()
                .zip(b)
                .map(|((m, x), (n, y))| {
                    if m.to_bits() != n.to_bits() {
                        return Err(Error::Incompatible("different transforms".into()));
                    }
                    Ok((*m, x.merge(y)?))
                })
                .collect()
        };
        Ok(Self {
            cfg: self.cfg,
            a: self.a.clone(),
            plus: zip(&self.plus, &other.plus)?,
            minus: zip(&self.minus, &other.minus)?,
            sum: self.sum.merge(&other.sum)?,
            elements: self.elements + other.elements,
        })
    }

    /// Returns `(plus part + linear · SUM, minus part)`.
    pub fn parts(&self) -> (f64, f64) {
        let side = |v: &[(f64, PointPipeline)]| v.iter().map(|(m, p)| m * p.estimate()).sum::<f64>();
        (side(&self.plus) + self.a.linear * self.sum.value(), side(&self.minus))
    }

    pub(crate) fn write(&self, w: &mut Writer) {
        w.u64(self.elements);
        w.bytes(&self.sum.to_bytes());
        for (_, p) in self.plus.iter().chain(self.minus.iter()) {
            p.write(w);
        }
    }

    pub(crate) fn read(
        cfg: PipelineConfig,
        a: SignedCoefficientFunction,
        sampling: Sampling,
        r: &mut Reader<'_>,
    ) -> Result<Self> {
        let mut out = Self::new(cfg, a, sampling)?;
        out.elements = r.u64()?;
        out.sum = SumCounter::from_bytes(r.bytes()?)?;
        for (_, p) in out.plus.iter_mut().chain(out.minus.iter_mut()) {
            let read = PointPipeline::read(cfg, r)?;
            if read.t().to_bits() != p.t().to_bits() {
                return Err(Error::Decode("component threshold does not match the statistic".into()));
            }
            *p = read;
        }
        Ok(out)
    }
}
