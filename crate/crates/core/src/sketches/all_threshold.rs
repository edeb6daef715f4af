use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use super::codec::{Reader, SketchType, Writer};
use super::{check_compatible, check_k, conditioned_weight, outkey_rank};
use crate::error::{invalid, Error, Result};
use crate::mappers::OutputElement;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdEntry {
    pub outkey: u64,
    /// Smallest value seen for the outkey.
    pub y: f64,
    pub rank: f64,
}

impl ThresholdEntry {
    fn cmp_y(&self, other: &Self) -> Ordering {
        self.y.total_cmp(&other.y).then(self.outkey.cmp(&other.outkey))
    }
}

// Max-heap key over (rank, outkey).
#[derive(Debug, Clone, Copy, PartialEq)]
struct RankKey(f64, u64);

impl Eq for RankKey {}

impl PartialOrd for RankKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RankKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

impl From<&ThresholdEntry> for RankKey {
    fn from(e: &ThresholdEntry) -> Self {
        RankKey(e.rank, e.outkey)
    }
}

/// A bottom-k distinct sketch for every threshold at once.
///
/// An outkey is kept iff fewer than `k` kept outkeys have both a smaller
/// `(y, outkey)` and a smaller `(rank, outkey)`. For each `t`, the entries
/// with `y ≤ t` then contain the bottom-k sketch of all outkeys whose
/// smallest value is at most `t`.
#[derive(Debug, Clone)]
pub struct AllThresholdSketch {
    k: u32,
    seed: u64,
    // Ascending by (y, outkey).
    entries: Vec<ThresholdEntry>,
    index: HashMap<u64, f64>,
}

impl PartialEq for AllThresholdSketch {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.seed == other.seed && self.entries == other.entries
    }
}

impl AllThresholdSketch {
    pub fn new(k: u32, seed: u64) -> Result<Self> {
        check_k(k)?;
        Ok(Self {
            k,
            seed,
            entries: Vec::new(),
            index: HashMap::new(),
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn entries(&self) -> &[ThresholdEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn update(&mut self, outkey: u64, y: f64) -> Result<()> {
        if !(y.is_finite() && y >= 0.0) {
            return Err(invalid(format!("threshold values must be finite and nonnegative, got {y}")));
        }
        if let Some(&old) = self.index.get(&outkey) {
            if old <= y {
                return Ok(());
            }
        }
        self.insert(ThresholdEntry { outkey, y, rank: outkey_rank(outkey, self.seed) });
        Ok(())
    }

    pub fn update_output(&mut self, e: &OutputElement) -> Result<()> {
        self.update(e.outkey, e.value)
    }

    fn insert(&mut self, e: ThresholdEntry) {
        let k = self.k as usize;
        let pos = self.entries.partition_point(|x| x.cmp_y(&e) == Ordering::Less);
        let key = RankKey::from(&e);
        let mut dominated = 0usize;
        for x in &self.entries[..pos] {
            if RankKey::from(x) < key {
                dominated += 1;
                if dominated >= k {
                    // Any stored entry for this outkey has a larger y and is
                    // dominated by the same entries.
                    return;
                }
            }
        }
        if let Some(old) = self.index.insert(e.outkey, e.y) {
            let at = self
                .entries
                .iter()
                .position(|x| x.outkey == e.outkey && x.y == old)
                .expect("indexed entry present");
            self.entries.remove(at);
        }
        self.entries.insert(pos, e);
        self.prune_from(pos);
    }

    // Re-applies the retention rule to entries after `pos`.
    fn prune_from(&mut self, pos: usize) {
        let k = self.k as usize;
        let mut heap: BinaryHeap<RankKey> = BinaryHeap::with_capacity(k + 1);
        for x in &self.entries[..=pos] {
            heap.push(x.into());
            if heap.len() > k {
                heap.pop();
            }
        }
        let mut write = pos + 1;
        for read in pos + 1..self.entries.len() {
            let x = self.entries[read];
            let key = RankKey::from(&x);
            if heap.len() < k || key < *heap.peek().unwrap() {
                heap.push(key);
                if heap.len() > k {
                    heap.pop();
                }
                self.entries[write] = x;
                write += 1;
            } else {
                self.index.remove(&x.outkey);
            }
        }
        self.entries.truncate(write);
    }

    pub fn merge(&self, other: &Self) -> Result<Self> {
        check_compatible("all-threshold sketch", (self.k, other.k), (self.seed, other.seed))?;
        let (mut out, src) = if self.len() >= other.len() { (self.clone(), other) } else { (other.clone(), self) };
        for e in &src.entries {
            match out.index.get(&e.outkey) {
                Some(&old) if old <= e.y => {}
                _ => out.insert(*e),
            }
        }
        Ok(out)
    }

    /// Estimated number of outkeys with smallest value at most `t`.
    pub fn estimate(&self, t: f64) -> f64 {
        let c = self.entries.partition_point(|x| x.y <= t);
        let k = self.k as usize;
        if c < k {
            return c as f64;
        }
        let mut ranks: Vec<f64> = self.entries[..c].iter().map(|x| x.rank).collect();
        let (_, tau, _) = ranks.select_nth_unstable_by(k - 1, f64::total_cmp);
        (k - 1) as f64 * conditioned_weight(1.0, *tau)
    }

    /// The estimate as a step function of `t`: pairs `(y_j, estimate(y_j))`
    /// for each distinct stored `y`, ascending. The estimate is zero before
    /// the first pair and constant between pairs.
    pub fn profile(&self) -> Vec<(f64, f64)> {
        let k = self.k as usize;
        let mut heap: BinaryHeap<RankKey> = BinaryHeap::with_capacity(k + 1);
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(self.entries.len());
        for (i, x) in self.entries.iter().enumerate() {
            heap.push(x.into());
            if heap.len() > k {
                heap.pop();
            }
            let est = if i + 1 < k {
                (i + 1) as f64
            } else {
                (k - 1) as f64 * conditioned_weight(1.0, heap.peek().unwrap().0)
            };
            match out.last_mut() {
                Some(last) if last.0 == x.y => last.1 = est,
                _ => out.push((x.y, est)),
            }
        }
        out
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.write(&mut w);
        w.finish()
    }

    pub(crate) fn write(&self, w: &mut Writer) {
        w.header(SketchType::AllThreshold, self.k, self.seed, self.entries.len());
        for e in &self.entries {
            w.u64(e.outkey);
            w.f64(e.y);
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
        let (k, seed, count) = r.header(SketchType::AllThreshold)?;
        let mut out = Self::new(k, seed).map_err(|e| Error::Decode(e.to_string()))?;
        for _ in 0..count {
            let outkey = r.u64()?;
            let y = r.f64()?;
            let rank = r.f64()?;
            if !(y.is_finite() && y >= 0.0) || rank.to_bits() != outkey_rank(outkey, seed).to_bits() {
                return Err(Error::Decode(format!("inconsistent entry for outkey {outkey:#x}")));
            }
            let e = ThresholdEntry { outkey, y, rank };
            if let Some(last) = out.entries.last() {
                if last.cmp_y(&e) != Ordering::Less {
                    return Err(Error::Decode("entries out of order".into()));
                }
            }
            if out.index.insert(outkey, y).is_some() {
                return Err(Error::Decode("duplicate outkey".into()));
            }
            out.entries.push(e);
        }
        let n = out.entries.len();
        if n > 0 {
            out.prune_from(0);
            if out.entries.len() != n {
                return Err(Error::Decode("entries violate the retention rule".into()));
            }
        }
        Ok(out)
    }
}
