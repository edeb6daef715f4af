use std::cmp::Ordering;

use super::codec::{Reader, SketchType, Writer};
use super::{check_compatible, check_k, conditioned_weight, outkey_rank};
use crate::error::{Error, Result};
use crate::random::outkey_uniform;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistinctEntry {
    pub outkey: u64,
    pub rank: f64,
}

impl DistinctEntry {
    fn cmp_key(&self, other: &Self) -> Ordering {
        self.rank.total_cmp(&other.rank).then(self.outkey.cmp(&other.outkey))
    }
}

/// Bottom-k distinct counter over outkeys with ranks `-ln u(outkey)`.
#[derive(Debug, Clone)]
pub struct DistinctCounter {
    k: u32,
    seed: u64,
    // Ascending by (rank, outkey); at most k entries.
    entries: Vec<DistinctEntry>,
    // Uniform of the k-th entry; 0 until full.
    cutoff_u: f64,
}

impl PartialEq for DistinctCounter {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.seed == other.seed && self.entries == other.entries
    }
}

impl DistinctCounter {
    pub fn new(k: u32, seed: u64) -> Result<Self> {
        check_k(k)?;
        Ok(Self {
            k,
            seed,
            entries: Vec::with_capacity(k as usize),
            cutoff_u: 0.0,
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn entries(&self) -> &[DistinctEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// True while fewer than `k` distinct outkeys have been seen.
    pub fn is_exact(&self) -> bool {
        self.entries.len() < self.k as usize
    }

    #[inline]
    pub fn update(&mut self, outkey: u64) {
        let u = outkey_uniform(outkey, self.seed);
        // Rank decreases in u; anything below the cutoff cannot enter.
        if u < self.cutoff_u {
            return;
        }
        self.insert(DistinctEntry { outkey, rank: -u.ln() });
    }

    fn insert(&mut self, e: DistinctEntry) {
        let full = !self.is_exact();
        if full && e.cmp_key(self.entries.last().unwrap()) != Ordering::Less {
            return;
        }
        match self.entries.binary_search_by(|x| x.cmp_key(&e)) {
            Ok(_) => return,
            Err(pos) => self.entries.insert(pos, e),
        }
        if self.entries.len() > self.k as usize {
            self.entries.pop();
        }
        if !self.is_exact() {
            self.cutoff_u = outkey_uniform(self.entries.last().unwrap().outkey, self.seed);
        }
    }

    pub fn merge(&self, other: &Self) -> Result<Self> {
        check_compatible("distinct counter", (self.k, other.k), (self.seed, other.seed))?;
        let mut out = self.clone();
        for e in &other.entries {
            out.insert(*e);
        }
        Ok(out)
    }

    /// Exact count below `k` entries, otherwise `(k-1) / (1 - e^{-τ_k})`.
    pub fn estimate(&self) -> f64 {
        if self.is_exact() {
            return self.entries.len() as f64;
        }
        let tau = self.entries[self.k as usize - 1].rank;
        (self.k - 1) as f64 * conditioned_weight(1.0, tau)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.header(SketchType::Distinct, self.k, self.seed, self.entries.len());
        for e in &self.entries {
            w.u64(e.outkey);
            w.f64(e.rank);
        }
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let out = Self::read(&mut r)?;
        r.finish()?;
        Ok(out)
    }

    pub(crate) fn read(r: &mut Reader<'_>) -> Result<Self> {
        let (k, seed, count) = r.header(SketchType::Distinct)?;
        let mut out = Self::new(k, seed).map_err(|e| Error::Decode(e.to_string()))?;
        if count > k as usize {
            return Err(Error::Decode("more entries than k".into()));
        }
        for _ in 0..count {
            let outkey = r.u64()?;
            let rank = r.f64()?;
            if rank.to_bits() != outkey_rank(outkey, seed).to_bits() {
                return Err(Error::Decode(format!("rank mismatch for outkey {outkey:#x}")));
            }
            let e = DistinctEntry { outkey, rank };
            if let Some(last) = out.entries.last() {
                if last.cmp_key(&e) != Ordering::Less {
                    return Err(Error::Decode("entries out of order".into()));
                }
            }
            out.entries.push(e);
        }
        if !out.is_exact() {
            out.cutoff_u = outkey_uniform(out.entries.last().unwrap().outkey, seed);
        }
        Ok(out)
    }
}
