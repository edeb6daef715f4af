//! Sketch files: a header naming the pipeline, statistic and parameters,
//! followed by the pipeline body.
//!
//! Layout, little endian: magic `FSK1`, `u16` version, `u8` pipeline type,
//! `u32` descriptor length and the UTF-8 descriptor, `f64` ε, `u32` r,
//! `u32` k, `u64` seed, then the body to end of file.

use std::fs;
use std::path::Path;

use capsketch::estimators::{Mode, Pipeline, PipelineConfig};
use capsketch::transforms::Statistic;
use capsketch::Error;

use crate::error::{CliError, CliResult};

pub const MAGIC: &[u8; 4] = b"FSK1";
pub const VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct SketchFile {
    pub stat: Statistic,
    pub pipeline: Pipeline,
}

impl SketchFile {
    pub fn new(stat: Statistic, pipeline: Pipeline) -> Self {
        Self { stat, pipeline }
    }

    pub fn mode(&self) -> Mode {
        self.pipeline.mode()
    }

    pub fn config(&self) -> PipelineConfig {
        self.pipeline.config()
    }

    pub fn descriptor(&self) -> String {
        self.stat.to_string()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let cfg = self.config();
        let descriptor = self.descriptor();
        let mut out = Vec::with_capacity(64);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(self.mode().tag());
        out.extend_from_slice(&(descriptor.len() as u32).to_le_bytes());
        out.extend_from_slice(descriptor.as_bytes());
        out.extend_from_slice(&cfg.epsilon.to_le_bytes());
        out.extend_from_slice(&cfg.r.to_le_bytes());
        out.extend_from_slice(&cfg.k.to_le_bytes());
        out.extend_from_slice(&cfg.seed.to_le_bytes());
        out.extend_from_slice(&self.pipeline.encode_body());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> capsketch::Result<Self> {
        let mut cur = Cursor { buf: bytes, pos: 0 };
        if cur.take(4)? != MAGIC {
            return Err(Error::Decode("bad magic".into()));
        }
        let version = u16::from_le_bytes(cur.array()?);
        if version != VERSION {
            return Err(Error::Decode(format!("unsupported version {version}")));
        }
        let mode = Mode::from_tag(cur.take(1)?[0])?;
        let len = u32::from_le_bytes(cur.array()?) as usize;
        let descriptor =
            std::str::from_utf8(cur.take(len)?).map_err(|_| Error::Decode("descriptor is not UTF-8".into()))?;
        let stat: Statistic = descriptor.parse().map_err(|e| Error::Decode(format!("descriptor: {e}")))?;
        let epsilon = f64::from_le_bytes(cur.array()?);
        let r = u32::from_le_bytes(cur.array()?);
        let k = u32::from_le_bytes(cur.array()?);
        let seed = u64::from_le_bytes(cur.array()?);
        let cfg = PipelineConfig::new(r, epsilon, k, seed).map_err(|e| Error::Decode(e.to_string()))?;
        let pipeline = Pipeline::decode_body(mode, cfg, &stat, &bytes[cur.pos..])?;
        Ok(Self { stat, pipeline })
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            Error::Decode(msg) => CliError::Format { path: path.display().to_string(), msg },
            other => other.into(),
        })
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        fs::write(path, self.to_bytes()).map_err(|e| CliError::io(path.display().to_string(), e))
    }

    /// Errors with the first header field that differs.
    pub fn check_compatible(&self, other: &Self) -> capsketch::Result<()> {
        let (a, b) = (self.config(), other.config());
        let fields = [
            ("sketch type", self.mode().to_string(), other.mode().to_string()),
            ("statistic", self.descriptor(), other.descriptor()),
            ("epsilon", a.epsilon.to_string(), b.epsilon.to_string()),
            ("r", a.r.to_string(), b.r.to_string()),
            ("k", a.k.to_string(), b.k.to_string()),
            ("seed", a.seed.to_string(), b.seed.to_string()),
        ];
        for (name, x, y) in fields {
            if x != y {
                return Err(Error::Incompatible(format!("{name} differs ({x} vs {y})")));
            }
        }
        Ok(())
    }

    pub fn merge(&self, other: &Self) -> capsketch::Result<Self> {
        self.check_compatible(other)?;
        Ok(Self { stat: self.stat, pipeline: self.pipeline.merge(&other.pipeline)? })
    }
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> capsketch::Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&end| end <= self.buf.len());
        let end = end.ok_or_else(|| Error::Decode("truncated header".into()))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn array<const N: usize>(&mut self) -> capsketch::Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }
}
