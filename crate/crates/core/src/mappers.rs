//! Element mappings. Each input element becomes up to `r` output elements,
//! one per replica `i`, keyed by `H_i(key)`.
//!
//! Replica `i` of an element draws `y_i ~ Exp(value)`; the per-outkey
//! minimum over all elements of a key is then `Exp(w_x)`.

use std::f64::consts::E;

use rand::seq::index;
use rand_distr::{Binomial, Distribution};

use crate::element::Element;
use crate::error::{invalid, Result};
use crate::random::{Ordinal, OutKeyHasher, RandomnessSource};
use crate::transforms::CoefficientFunction;

/// An output element: an outkey and a nonnegative value whose meaning
/// depends on the mapping (unused for point, `tail(a, y)` for combination,
/// the raw draw `y` for full range).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputElement {
    pub outkey: u64,
    pub value: f64,
}

/// Replicas needed for a worst-case relative error `ε` of point
/// measurements: `⌈(e/(e-1)) ε^{-2.5}⌉`.
pub fn replica_count(epsilon: f64) -> Result<u32> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("epsilon must lie in (0,1), got {epsilon}")));
    }
    let r = (E / (E - 1.0) * epsilon.powf(-2.5)).ceil();
    if r > u32::MAX as f64 {
        return Err(invalid(format!("epsilon {epsilon} needs too many replicas")));
    }
    Ok(r as u32)
}

/// Replicas to use when the caller knows `SUM ≥ ε^{-2.5} MAX`: one.
pub fn replica_count_large_sum() -> u32 {
    1
}

/// Parameters of a mapping.
#[derive(Debug, Clone, PartialEq)]
pub struct MapperConfig {
    pub r: u32,
    pub seed: u64,
    /// Threshold of point mappings.
    pub t: f64,
    /// Coefficients of combination mappings.
    pub a: CoefficientFunction,
    /// Lower clamp of combination mappings.
    pub tau: f64,
}

impl MapperConfig {
    pub fn new(r: u32, seed: u64) -> Result<Self> {
        if r == 0 {
            return Err(invalid("replica count must be at least 1"));
        }
        Ok(Self {
            r,
            seed,
            t: 0.0,
            a: CoefficientFunction::zero(),
            tau: 0.0,
        })
    }

    pub fn with_threshold(mut self, t: f64) -> Result<Self> {
        if !(t >= 0.0) {
            return Err(invalid(format!("threshold must be nonnegative, got {t}")));
        }
        self.t = t;
        Ok(self)
    }

    pub fn with_coefficients(mut self, a: CoefficientFunction, tau: f64) -> Result<Self> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(invalid(format!("tau must be finite and nonnegative, got {tau}")));
        }
        self.a = a;
        self.tau = tau;
        Ok(self)
    }
}

/// Stateless mapper for a fixed `(r, seed)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mapper {
    r: u32,
    source: RandomnessSource,
    hasher: OutKeyHasher,
}

impl Mapper {
    pub fn new(r: u32, seed: u64) -> Result<Self> {
        if r == 0 {
            return Err(invalid("replica count must be at least 1"));
        }
        Ok(Self {
            r,
            source: RandomnessSource::new(seed),
            hasher: OutKeyHasher::new(seed),
        })
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn seed(&self) -> u64 {
        self.source.seed()
    }

    /// Replica draw `y_i`.
    #[inline]
    pub fn draw(&self, e: &Element, ordinal: Ordinal, replica: u32) -> Result<f64> {
        self.source.exp(ordinal, replica, e.value())
    }

    /// Emits `(i, H_i(key))` for every replica with `y_i ≤ t`.
    pub fn point<F: FnMut(u32, u64)>(&self, e: &Element, ordinal: Ordinal, t: f64, mut emit: F) -> Result<()> {
        check_threshold(t)?;
        if t == 0.0 {
            return Ok(());
        }
        let h = self.hasher.key_hash(e.key());
        for i in 0..self.r {
            if self.draw(e, ordinal, i)? <= t {
                emit(i, OutKeyHasher::outkey_from_hash(h, i));
            }
        }
        Ok(())
    }

    /// Same output distribution as [`Mapper::point`] at a cost linear in
    /// the number of emitted outkeys: draws the count from a binomial, then
    /// the replica set uniformly.
    pub fn point_fast<F: FnMut(u32, u64)>(&self, e: &Element, ordinal: Ordinal, t: f64, mut emit: F) -> Result<()> {
        check_threshold(t)?;
        let p = -(-e.value() * t).exp_m1();
        if p <= 0.0 {
            return Ok(());
        }
        let h = self.hasher.key_hash(e.key());
        if p >= 1.0 {
            for i in 0..self.r {
                emit(i, OutKeyHasher::outkey_from_hash(h, i));
            }
            return Ok(());
        }
        let mut rng = self.source.stream(ordinal);
        let count = Binomial::new(self.r as u64, p)
            .map_err(|err| invalid(format!("binomial parameters: {err}")))?
            .sample(&mut rng) as usize;
        if count == 0 {
            return Ok(());
        }
        for i in index::sample(&mut rng, self.r as usize, count).iter() {
            emit(i as u32, OutKeyHasher::outkey_from_hash(h, i as u32));
        }
        Ok(())
    }

    /// Emits `(H_i(key), tail(a, max(τ, y_i)))` for every replica with a
    /// positive value.
    pub fn combination<F: FnMut(OutputElement)>(
        &self,
        e: &Element,
        ordinal: Ordinal,
        a: &CoefficientFunction,
        tau: f64,
        mut emit: F,
    ) -> Result<()> {
        let h = self.hasher.key_hash(e.key());
        for i in 0..self.r {
            let y = self.draw(e, ordinal, i)?;
            let v = a.tail_integral(y.max(tau))?;
            if v > 0.0 {
                emit(OutputElement { outkey: OutKeyHasher::outkey_from_hash(h, i), value: v });
            }
        }
        Ok(())
    }

    /// Emits `(H_i(key), y_i)` for every replica.
    pub fn full_range<F: FnMut(OutputElement)>(&self, e: &Element, ordinal: Ordinal, mut emit: F) -> Result<()> {
        let h = self.hasher.key_hash(e.key());
        for i in 0..self.r {
            let y = self.draw(e, ordinal, i)?;
            emit(OutputElement { outkey: OutKeyHasher::outkey_from_hash(h, i), value: y });
        }
        Ok(())
    }
}

fn check_threshold(t: f64) -> Result<()> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("threshold must be nonnegative, got {t}")))
    }
}

fn keys_only(keys: Vec<u64>) -> Vec<OutputElement> {
    keys.into_iter().map(|outkey| OutputElement { outkey, value: 0.0 }).collect()
}

/// Point mapping with one draw per replica.
pub fn map_point(e: &Element, ordinal: Ordinal, cfg: &MapperConfig) -> Result<Vec<OutputElement>> {
    let mut keys = Vec::new();
    Mapper::new(cfg.r, cfg.seed)?.point(e, ordinal, cfg.t, |_, k| keys.push(k))?;
    Ok(keys_only(keys))
}

/// Point mapping through the binomial fast path.
pub fn map_point_fast(e: &Element, ordinal: Ordinal, cfg: &MapperConfig) -> Result<Vec<OutputElement>> {
    let mut keys = Vec::new();
    Mapper::new(cfg.r, cfg.seed)?.point_fast(e, ordinal, cfg.t, |_, k| keys.push(k))?;
    Ok(keys_only(keys))
}

pub fn map_combination(e: &Element, ordinal: Ordinal, cfg: &MapperConfig) -> Result<Vec<OutputElement>> {
    let mut out = Vec::new();
    Mapper::new(cfg.r, cfg.seed)?.combination(e, ordinal, &cfg.a, cfg.tau, |o| out.push(o))?;
    Ok(out)
}

pub fn map_full_range(e: &Element, ordinal: Ordinal, cfg: &MapperConfig) -> Result<Vec<OutputElement>> {
    let mut out = Vec::with_capacity(cfg.r as usize);
    Mapper::new(cfg.r, cfg.seed)?.full_range(e, ordinal, |o| out.push(o))?;
    Ok(out)
}
