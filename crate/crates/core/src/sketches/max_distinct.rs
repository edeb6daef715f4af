use std::cmp::Ordering;

use super::codec::{Reader, SketchType, Writer};
use super::{check_compatible, check_k, conditioned_weight, outkey_rank};
use crate::error::{invalid, Error, Result};
use crate::mappers::OutputElement;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxDistinctEntry {
    pub outkey: u64,
    /// Largest value seen for the outkey.
    pub m: f64,
    /// `-ln u(outkey) / m`.
    pub rank: f64,
}

impl MaxDistinctEntry {
    fn cmp_key(&self, other: &Self) -> Ordering {
        self.rank.total_cmp(&other.rank).then(self.outkey.cmp(&other.outkey))
    }
}

/// Bottom-k sketch of `Σ_x m_x`, the sum over outkeys of their largest
/// value.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxDistinctSketch {
    k: u32,
    seed: u64,
    entries: Vec<MaxDistinctEntry>,
}

impl MaxDistinctSketch {
    pub fn new(k: u32, seed: u64) -> Result<Self> {
        check_k(k)?;
        Ok(Self {
            k,
            seed,
            entries: Vec::with_capacity(k as usize + 1),
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn entries(&self) -> &[MaxDistinctEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.entries.len() < self.k as usize
    }

    /// Records value `value` for `outkey`. Nonpositive values are ignored.
    pub fn update(&mut self, outkey: u64, value: f64) -> Result<()> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(invalid(format!("max-distinct values must be finite and nonnegative, got {value}")));
        }
        if value == 0.0 {
            return Ok(());
        }
        let rank = outkey_rank(outkey, self.seed) / value;
        self.insert(MaxDistinctEntry { outkey, m: value, rank });
        Ok(())
    }

    pub fn update_output(&mut self, e: &OutputElement) -> Result<()> {
        self.update(e.outkey, e.value)
    }

    fn insert(&mut self, e: MaxDistinctEntry) {
        if !self.is_exact() && e.cmp_key(self.entries.last().unwrap()) != Ordering::Less {
            // A stored entry for this outkey already has rank at most the
            // cutoff, so its value is at least `e.m`.
            return;
        }
        if let Some(i) = self.entries.iter().position(|x| x.outkey == e.outkey) {
            if self.entries[i].m >= e.m {
                return;
            }
            self.entries.remove(i);
        }
        let pos = self.entries.partition_point(|x| x.cmp_key(&e) == Ordering::Less);
        self.entries.insert(pos, e);
        self.entries.truncate(self.k as usize);
    }

    pub fn merge(&self, other: &Self) -> Result<Self> {
        check_compatible("max-distinct sketch", (self.k, other.k), (self.seed, other.seed))?;
        let mut out = self.clone();
        for e in &other.entries {
            out.insert(*e);
        }
        Ok(out)
    }

    /// Exact `Σ m` below `k` entries, otherwise `(k-1) / τ_k`.
    pub fn estimate(&self) -> f64 {
        if self.is_exact() {
            return self.entries.iter().map(|e| e.m).sum();
        }
        (self.k - 1) as f64 / self.entries[self.k as usize - 1].rank
    }

    /// Exact `Σ m` below `k` entries, otherwise `Σ m / (1 - e^{-m τ_k})`
    /// over the `k - 1` smallest ranks. Unbiased for any spread of values,
    /// where [`estimate`](Self::estimate) loses the mass of outkeys whose
    /// `m τ_k` is not small.
    pub fn estimate_weighted(&self) -> f64 {
        if self.is_exact() {
            return self.entries.iter().map(|e| e.m).sum();
        }
        let tau = self.entries[self.k as usize - 1].rank;
        self.entries[..self.k as usize - 1].iter().map(|e| conditioned_weight(e.m, tau)).sum()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.write(&mut w);
        w.finish()
    }

    pub(crate) fn write(&self, w: &mut Writer) {
        w.header(SketchType::MaxDistinct, self.k, self.seed, self.entries.len());
        for e in &self.entries {
            w.u64(e.outkey);
            w.f64(e.m);
            w.f64(e.rank);
        }
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let out = Self::read(&mut r)?;
        r.finish()?;
        Ok(out)
    }

    pub(crate) fn read(r: &mut Reader<'_>) -> Result<Self> {
        let (k, seed, count) = r.header(SketchType::MaxDistinct)?;
        let mut out = Self::new(k, seed).map_err(|e| Error::Decode(e.to_string()))?;
        if count > k as usize {
            return Err(Error::Decode("more entries than k".into()));
        }
        for _ in 0..count {
            let outkey = r.u64()?;
            let m = r.f64()?;
            let rank = r.f64()?;
            if !(m.is_finite() && m > 0.0) || rank.to_bits() != (outkey_rank(outkey, seed) / m).to_bits() {
                return Err(Error::Decode(format!("inconsistent entry for outkey {outkey:#x}")));
            }
            let e = MaxDistinctEntry { outkey, m, rank };
            if let Some(last) = out.entries.last() {
                if last.cmp_key(&e) != Ordering::Less {
                    return Err(Error::Decode("entries out of order".into()));
                }
            }
            out.entries.push(e);
        }
        Ok(out)
    }
}
