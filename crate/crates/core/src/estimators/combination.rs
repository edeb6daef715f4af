use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use super::PipelineConfig;
use crate::element::Element;
use crate::error::{Error, Result};
use crate::mappers::{Mapper, OutputElement};
use crate::random::Ordinal;
use crate::sketches::{MaxDistinctSketch, Reader, SumCounter, Writer};
use crate::transforms::{CoefficientFunction, SignedCoefficientFunction};

#[derive(Debug, Clone, Copy, PartialEq)]
struct Side {
    y: f64,
    outkey: u64,
}

impl Eq for Side {}

impl PartialOrd for Side {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Side {
    fn cmp(&self, other: &Self) -> Ordering {
        self.y.total_cmp(&other.y).then(self.outkey.cmp(&other.outkey))
    }
}

/// Combination measurement of `∫ a(t) LapM[W](t) dt` with an adaptive
/// cutoff `τ`.
///
/// The `ℓ = ⌈3ε^{-2}⌉` outkeys with the smallest draws are held back. Every
/// other outkey reaches the max-distinct sketch with value `tail(a, y)`.
/// At finalization `τ` is the largest held-back draw; held-back outkeys
/// enter with `tail(a, τ)`, and the range below `τ` is covered by
/// `SUM · ∫_0^τ a(t) t dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinationPipeline {
    cfg: PipelineConfig,
    a: CoefficientFunction,
    mapper: Mapper,
    md: MaxDistinctSketch,
    sum: SumCounter,
    capacity: usize,
    sidelined: BTreeSet<Side>,
    side_y: HashMap<u64, f64>,
    elements: u64,
}

impl CombinationPipeline {
    pub fn new(cfg: PipelineConfig, a: CoefficientFunction) -> Result<Self> {
        Ok(Self {
            mapper: Mapper::new(cfg.r, cfg.seed)?,
            md: MaxDistinctSketch::new(cfg.k, cfg.seed)?,
            sum: SumCounter::new(),
            capacity: cfg.sideline_capacity(),
            sidelined: BTreeSet::new(),
            side_y: HashMap::new(),
            elements: 0,
            cfg,
            a,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn coefficients(&self) -> &CoefficientFunction {
        &self.a
    }

    pub fn sketch(&self) -> &MaxDistinctSketch {
        &self.md
    }

    pub fn sum(&self) -> &SumCounter {
        &self.sum
    }

    pub fn elements(&self) -> u64 {
        self.elements
    }

    pub fn sidelined_len(&self) -> usize {
        self.sidelined.len()
    }

    /// Largest held-back draw, once any output was seen.
    pub fn tau(&self) -> Option<f64> {
        self.sidelined.last().map(|s| s.y)
    }

    /// Maps `e` with one draw per replica and ingests the draws.
    pub fn ingest(&mut self, e: &Element, ordinal: Ordinal) -> Result<()> {
        self.add_sum(e.value())?;
        let mapper = self.mapper;
        let mut res = Ok(());
        mapper.full_range(e, ordinal, |o| {
            if res.is_ok() {
                res = self.ingest_output(o);
            }
        })?;
        res
    }

    pub(crate) fn add_sum(&mut self, value: f64) -> Result<()> {
        self.elements += 1;
        self.sum.add(value)
    }

    /// Ingests an output element carrying its raw draw `y` as value.
    pub fn ingest_output(&mut self, o: OutputElement) -> Result<()> {
        let (outkey, y) = (o.outkey, o.value);
        if let Some(old) = self.side_y.get_mut(&outkey) {
            if y < *old {
                self.sidelined.remove(&Side { y: *old, outkey });
                self.sidelined.insert(Side { y, outkey });
                *old = y;
            }
            return Ok(());
        }
        let new = Side { y, outkey };
        if self.sidelined.len() < self.capacity {
            self.sidelined.insert(new);
            self.side_y.insert(outkey, y);
            return Ok(());
        }
        let max = *self.sidelined.last().expect("capacity is positive");
        if new < max {
            self.sidelined.pop_last();
            self.side_y.remove(&max.outkey);
            self.sidelined.insert(new);
            self.side_y.insert(outkey, y);
            self.feed(max.outkey, max.y)
        } else {
            self.feed(outkey, y)
        }
    }

    fn feed(&mut self, outkey: u64, y: f64) -> Result<()> {
        let v = self.a.tail_integral(y)?;
        self.md.update(outkey, v)
    }

    pub fn merge(&self, other: &Self) -> Result<Self> {
        self.cfg.check_same(&other.cfg)?;
        if self.a != other.a {
            return Err(Error::Incompatible("coefficient functions differ".into()));
        }
        let mut out = self.clone();
        out.md = out.md.merge(&other.md)?;
        out.sum = out.sum.merge(&other.sum)?;
        out.elements += other.elements;
        for (&outkey, &y) in &other.side_y {
            let e = out.side_y.entry(outkey).or_insert(y);
            *e = e.min(y);
        }
        let mut all: Vec<Side> = out.side_y.iter().map(|(&outkey, &y)| Side { y, outkey }).collect();
        all.sort_unstable();
        let rest = all.split_off(all.len().min(out.capacity));
        out.sidelined = all.into_iter().collect();
        for s in rest {
            out.side_y.remove(&s.outkey);
            out.feed(s.outkey, s.y)?;
        }
        Ok(out)
    }

    /// `M̂dCount / r + SUM · ∫_0^τ a(t) t dt`.
    pub fn finalize(&self) -> Result<f64> {
        let Some(tau) = self.tau() else {
            return Ok(self.md.estimate_weighted() / self.cfg.r as f64);
        };
        let mut md = self.md.clone();
        let v = self.a.tail_integral(tau)?;
        for s in &self.sidelined {
            md.update(s.outkey, v)?;
        }
        let head = self.a.head_integral(tau)?;
        Ok(md.estimate_weighted() / self.cfg.r as f64 + self.sum.value() * head)
    }

    pub(crate) fn write(&self, w: &mut Writer) {
        w.u64(self.elements);
        w.bytes(&self.md.to_bytes());
        w.bytes(&self.sum.to_bytes());
        w.u64(self.sidelined.len() as u64);
        for s in &self.sidelined {
            w.u64(s.outkey);
            w.f64(s.y);
        }
    }

    pub(crate) fn read(cfg: PipelineConfig, a: CoefficientFunction, r: &mut Reader<'_>) -> Result<Self> {
        let mut out = Self::new(cfg, a).map_err(|e| Error::Decode(e.to_string()))?;
        out.elements = r.u64()?;
        out.md = MaxDistinctSketch::from_bytes(r.bytes()?)?;
        out.sum = SumCounter::from_bytes(r.bytes()?)?;
        if out.md.k() != cfg.k || out.md.seed() != cfg.seed {
            return Err(Error::Decode("embedded sketch does not match the configuration".into()));
        }
        let n = r.u64()? as usize;
        if n > out.capacity {
            return Err(Error::Decode("sidelined set exceeds its capacity".into()));
        }
        for _ in 0..n {
            let outkey = r.u64()?;
            let y = r.f64()?;
            if !(y.is_finite() && y >= 0.0) {
                return Err(Error::Decode("invalid sidelined draw".into()));
            }
            let s = Side { y, outkey };
            if out.sidelined.last().is_some_and(|last| *last >= s) || out.side_y.insert(outkey, y).is_some() {
                return Err(Error::Decode("sidelined entries out of order".into()));
            }
            out.sidelined.insert(s);
        }
        Ok(out)
    }
}

/// Combination measurements of `a₊` and `a₋` over shared draws, plus the
/// linear term through `SUM`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedCombinationPipeline {
    a: SignedCoefficientFunction,
    mapper: Mapper,
    plus: CombinationPipeline,
    minus: Option<CombinationPipeline>,
}

impl SignedCombinationPipeline {
    pub fn new(cfg: PipelineConfig, a: SignedCoefficientFunction) -> Result<Self> {
        let plus = CombinationPipeline::new(cfg, a.plus.clone())?;
        let minus = if a.minus.is_zero() {
            None
        } else {
            Some(CombinationPipeline::new(cfg, a.minus.clone())?)
        };
        Ok(Self {
            mapper: Mapper::new(cfg.r, cfg.seed)?,
            a,
            plus,
            minus,
        })
    }

    pub fn transform(&self) -> &SignedCoefficientFunction {
        &self.a
    }

    pub fn plus(&self) -> &CombinationPipeline {
        &self.plus
    }

    pub fn minus(&self) -> Option<&CombinationPipeline> {
        self.minus.as_ref()
    }

    pub fn elements(&self) -> u64 {
        self.plus.elements()
    }

    /// Output elements mapped so far, `r` per input element.
    pub fn outputs(&self) -> u64 {
        self.plus.elements() * self.plus.config().r as u64
    }

    pub fn ingest(&mut self, e: &Element, ordinal: Ordinal) -> Result<()> {
        self.plus.add_sum(e.value())?;
        if let Some(m) = self.minus.as_mut() {
            m.add_sum(e.value())?;
        }
        let mapper = self.mapper;
        let mut res = Ok(());
        mapper.full_range(e, ordinal, |o| {
            if res.is_ok() {
                res = self.plus.ingest_output(o);
            }
            if res.is_ok() {
                if let Some(m) = self.minus.as_mut() {
                    res = m.ingest_output(o);
                }
            }
        })?;
        res
    }

    pub fn merge(&self, other: &Self) -> Result<Self> {
        let minus = match (&self.minus, &other.minus) {
            (Some(a), Some(b)) => Some(a.merge(b)?),
            (None, None) => None,
            _ => return Err(Error::Incompatible("different transforms".into())),
        };
        Ok(Self {
            a: self.a.clone(),
            mapper: self.mapper,
            plus: self.plus.merge(&other.plus)?,
            minus,
        })
    }

    /// Returns `(plus part + linear · SUM, minus part)`.
    pub fn parts(&self) -> Result<(f64, f64)> {
        let plus = self.plus.finalize()? + self.a.linear * self.plus.sum().value();
        let minus = match &self.minus {
            Some(m) => m.finalize()?,
            None => 0.0,
        };
        Ok((plus, minus))
    }

    pub(crate) fn write(&self, w: &mut Writer) {
        self.plus.write(w);
        if let Some(m) = &self.minus {
            m.write(w);
        }
    }

    pub(crate) fn read(cfg: PipelineConfig, a: SignedCoefficientFunction, r: &mut Reader<'_>) -> Result<Self> {
        let mut out = Self::new(cfg, a)?;
        out.plus = CombinationPipeline::read(cfg, out.a.plus.clone(), r)?;
        if out.minus.is_some() {
            out.minus = Some(CombinationPipeline::read(cfg, out.a.minus.clone(), r)?);
        }
        Ok(out)
    }
}
