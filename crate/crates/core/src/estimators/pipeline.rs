use std::fmt;
use std::str::FromStr;

use super::{
    signed_estimate, FullRangePipeline, PipelineConfig, Sampling, SignedCombinationPipeline, SignedEstimate,
    SignedPointPipeline,
};
use crate::element::Element;
use crate::error::{invalid, Error, Result};
use crate::random::Ordinal;
use crate::sketches::{Reader, Writer};
use crate::transforms::{estimation_transform, SignedCoefficientFunction, Statistic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Point,
    Combination,
    FullRange,
}

impl Mode {
    pub fn tag(self) -> u8 {
        match self {
            Mode::Point => 1,
            Mode::Combination => 2,
            Mode::FullRange => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            1 => Ok(Mode::Point),
            2 => Ok(Mode::Combination),
            3 => Ok(Mode::FullRange),
            other => Err(Error::Decode(format!("unknown pipeline type {other}"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Point => "point",
            Mode::Combination => "combination",
            Mode::FullRange => "fullrange",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "point" => Ok(Mode::Point),
            "combination" => Ok(Mode::Combination),
            "fullrange" | "full-range" => Ok(Mode::FullRange),
            other => Err(invalid(format!("unknown mode {other:?}"))),
        }
    }
}

/// A pipeline of any mode, built for one statistic.
#[derive(Debug, Clone, PartialEq)]
pub enum Pipeline {
    Point(SignedPointPipeline),
    Combination(SignedCombinationPipeline),
    FullRange(FullRangePipeline),
}

impl Pipeline {
    /// Point mode needs a transform made of point masses; combination
    /// mode takes any transform. Full range ignores the statistic until
    /// query time, but it must still have a transform.
    pub fn new(mode: Mode, cfg: PipelineConfig, stat: &Statistic) -> Result<Self> {
        let a = estimation_transform(stat)?;
        Ok(match mode {
            Mode::Point => Pipeline::Point(SignedPointPipeline::new(cfg, a, Sampling::Binomial)?),
            Mode::Combination => Pipeline::Combination(SignedCombinationPipeline::new(cfg, a)?),
            Mode::FullRange => Pipeline::FullRange(FullRangePipeline::new(cfg)?),
        })
    }

    pub fn mode(&self) -> Mode {
        match self {
            Pipeline::Point(_) => Mode::Point,
            Pipeline::Combination(_) => Mode::Combination,
            Pipeline::FullRange(_) => Mode::FullRange,
        }
    }

    pub fn config(&self) -> PipelineConfig {
        match self {
            Pipeline::Point(p) => *p.config(),
            Pipeline::Combination(p) => *p.plus().config(),
            Pipeline::FullRange(p) => *p.config(),
        }
    }

    pub fn elements(&self) -> u64 {
        match self {
            Pipeline::Point(p) => p.elements(),
            Pipeline::Combination(p) => p.elements(),
            Pipeline::FullRange(p) => p.elements(),
        }
    }

    /// Output elements produced by the mappings so far.
    pub fn outputs(&self) -> u64 {
        match self {
            Pipeline::Point(p) => p.outputs(),
            Pipeline::Combination(p) => p.outputs(),
            Pipeline::FullRange(p) => p.elements() * p.config().r as u64,
        }
    }

    pub fn ingest(&mut self, e: &Element, ordinal: Ordinal) -> Result<()> {
        match self {
            Pipeline::Point(p) => p.ingest(e, ordinal),
            Pipeline::Combination(p) => p.ingest(e, ordinal),
            Pipeline::FullRange(p) => p.ingest(e, ordinal),
        }
    }

    pub fn merge(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (Pipeline::Point(a), Pipeline::Point(b)) => Ok(Pipeline::Point(a.merge(b)?)),
            (Pipeline::Combination(a), Pipeline::Combination(b)) => Ok(Pipeline::Combination(a.merge(b)?)),
            (Pipeline::FullRange(a), Pipeline::FullRange(b)) => Ok(Pipeline::FullRange(a.merge(b)?)),
            (a, b) => Err(Error::Incompatible(format!("mode differs ({} vs {})", a.mode(), b.mode()))),
        }
    }

    /// Estimate of `stat`. Point and combination pipelines answer only the
    /// statistic they were built for; full-range pipelines answer any.
    pub fn estimate(&self, stat: &Statistic) -> Result<SignedEstimate> {
        let eps = self.config().epsilon;
        let a = estimation_transform(stat)?;
        let (plus, minus) = match self {
            Pipeline::Point(p) => {
                check_transform(p.transform(), &a)?;
                p.parts()
            }
            Pipeline::Combination(p) => {
                check_transform(p.transform(), &a)?;
                p.parts()?
            }
            Pipeline::FullRange(p) => p.signed_parts(&a)?,
        };
        Ok(signed_estimate(plus, minus, &a, eps, eps))
    }

    /// `LapM̂[W](t)` from a full-range pipeline.
    pub fn point_query(&self, t: f64) -> Result<f64> {
        match self {
            Pipeline::FullRange(p) => {
                if !(t >= 0.0) {
                    return Err(invalid(format!("query point must be nonnegative, got {t}")));
                }
                Ok(p.estimate(t))
            }
            other => Err(invalid(format!("point queries need a fullrange pipeline, not {}", other.mode()))),
        }
    }

    /// Serialized body: the component sketches and counters.
    pub fn encode_body(&self) -> Vec<u8> {
        let mut w = Writer::new();
        match self {
            Pipeline::Point(p) => p.write(&mut w),
            Pipeline::Combination(p) => p.write(&mut w),
            Pipeline::FullRange(p) => p.write(&mut w),
        }
        w.finish()
    }

    pub fn decode_body(mode: Mode, cfg: PipelineConfig, stat: &Statistic, bytes: &[u8]) -> Result<Self> {
        let a = estimation_transform(stat)?;
        let mut r = Reader::new(bytes);
        let out = match mode {
            Mode::Point => Pipeline::Point(SignedPointPipeline::read(cfg, a, Sampling::Binomial, &mut r)?),
            Mode::Combination => Pipeline::Combination(SignedCombinationPipeline::read(cfg, a, &mut r)?),
            Mode::FullRange => Pipeline::FullRange(FullRangePipeline::read(cfg, &mut r)?),
        };
        r.finish()?;
        Ok(out)
    }
}

fn check_transform(have: &SignedCoefficientFunction, want: &SignedCoefficientFunction) -> Result<()> {
    if have.plus == want.plus && have.minus == want.minus && have.linear.to_bits() == want.linear.to_bits() {
        Ok(())
    } else {
        Err(invalid("this pipeline was built for a different statistic; only fullrange pipelines take overrides"))
    }
}
