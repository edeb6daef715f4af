//! Nonnegative coefficient functions `a(t)`: a finite set of point masses
//! plus a sum of named continuous densities, each with closed-form tail and
//! head integrals.

use super::special::{
    e1, gamma, integrate, log1p_minus_ratio, one_minus_exp_poly1, scaled_e1,
};
use crate::error::{invalid, Error, Result};

/// A point mass `mass · δ(t - at)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delta {
    pub at: f64,
    pub mass: f64,
}

/// Continuous coefficient densities.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    /// `p / Γ(1-p) · t^{-(1+p)}`, the inverse transform of `w^p`.
    Moment { p: f64 },
    /// `e^{-t} / t`, the inverse transform of `ln(1 + w)`.
    Log1p,
    /// `e^{-t/T} / T`, the capping transform of the soft cap at `T`.
    ExpDensity { scale: f64 },
    /// `1 / (1 + t)^2`, the capping transform of `ln(1 + w)`.
    InverseSquare,
    /// `p(1-p) t^{p-2}` on `t > 1`, the continuous part of the capping
    /// transform of `min(w, w^p)`.
    PowerTail { p: f64 },
    /// `mass · at² · base(at / t) / t³`: the image of a capping density
    /// under a point mass `mass` at `at` of a cap₁ approximation.
    Lifted { base: Box<Density>, at: f64, mass: f64 },
}

impl Density {
    pub fn density(&self, t: f64) -> f64 {
        if !(t > 0.0) {
            return 0.0;
        }
        match self {
            Density::Moment { p } => p / gamma(1.0 - p) * t.powf(-(1.0 + p)),
            Density::Log1p => (-t).exp() / t,
            Density::ExpDensity { scale } => (-t / scale).exp() / scale,
            Density::InverseSquare => 1.0 / ((1.0 + t) * (1.0 + t)),
            Density::PowerTail { p } => {
                if t > 1.0 {
                    p * (1.0 - p) * t.powf(p - 2.0)
                } else {
                    0.0
                }
            }
            Density::Lifted { base, at, mass } => {
                let u = at / t;
                if !u.is_finite() {
                    return 0.0;
                }
                mass * at * at * base.density(u) / (t * t * t)
            }
        }
    }

    /// `∫_τ^∞ a(t) dt`; `+∞` when the total mass diverges at `τ = 0`.
    pub fn tail(&self, tau: f64) -> f64 {
        if tau.is_infinite() {
            return 0.0;
        }
        match self {
            Density::Moment { p } => tau.powf(-p) / gamma(1.0 - p),
            Density::Log1p => e1(tau),
            Density::ExpDensity { scale } => (-tau / scale).exp(),
            Density::InverseSquare => 1.0 / (1.0 + tau),
            Density::PowerTail { p } => p * tau.max(1.0).powf(p - 1.0),
            Density::Lifted { base, at, mass } => mass * base.head(at / tau),
        }
    }

    /// `∫_0^τ a(t) t dt`.
    pub fn head(&self, tau: f64) -> f64 {
        if tau <= 0.0 {
            return 0.0;
        }
        match self {
            Density::Moment { p } => {
                p * tau.powf(1.0 - p) / ((1.0 - p) * gamma(1.0 - p))
            }
            Density::Log1p => -(-tau).exp_m1(),
            Density::ExpDensity { scale } => scale * one_minus_exp_poly1(tau / scale),
            Density::InverseSquare => log1p_minus_ratio(tau),
            Density::PowerTail { p } => {
                if tau > 1.0 {
                    (1.0 - p) * (p * tau.ln()).exp_m1()
                } else {
                    0.0
                }
            }
            Density::Lifted { base, at, mass } => mass * at * base.tail(at / tau),
        }
    }

    /// `∫_0^∞ a(t) (1 - e^{-wt}) dt`.
    pub fn transform(&self, w: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        match self {
            Density::Moment { p } => w.powf(*p),
            Density::Log1p => w.ln_1p(),
            Density::ExpDensity { scale } => w * scale / (1.0 + w * scale),
            Density::InverseSquare => {
                if w.is_infinite() {
                    1.0
                } else {
                    w * scaled_e1(w)
                }
            }
            Density::PowerTail { .. } | Density::Lifted { .. } => {
                transform_from_tail(|t| self.tail(t), w)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Density::Moment { p } | Density::PowerTail { p } => {
                if !(*p > 0.0 && *p < 1.0) {
                    return Err(invalid(format!("moment exponent must lie in (0,1), got {p}")));
                }
            }
            Density::ExpDensity { scale } => {
                if !(scale.is_finite() && *scale > 0.0) {
                    return Err(invalid(format!("scale must be positive, got {scale}")));
                }
            }
            Density::Log1p | Density::InverseSquare => {}
            Density::Lifted { base, at, mass } => {
                if !(at.is_finite() && *at > 0.0 && mass.is_finite() && *mass > 0.0) {
                    return Err(invalid("lifted location and mass must be positive"));
                }
                base.validate()?;
            }
        }
        Ok(())
    }
}

/// `w ∫_0^∞ e^{-wt} tail(t) dt`, integrated in `s = ln(wt)`.
fn transform_from_tail<F: Fn(f64) -> f64>(tail: F, w: f64) -> f64 {
    let g = |s: f64| {
        let u = s.exp();
        let v = tail(u / w);
        if v == 0.0 {
            0.0
        } else {
            (-u).exp() * u * v
        }
    };
    integrate(g, -60.0, 4.0, 1e-11)
}

/// A weighted continuous term.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub weight: f64,
    pub density: Density,
}

/// A nonnegative coefficient function: point masses plus weighted densities.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientFunction {
    // Sorted by location, no duplicates, all masses > 0.
    deltas: Vec<Delta>,
    // suffix[i] = Σ_{j ≥ i} deltas[j].mass
    suffix: Vec<f64>,
    // prefix_moment[i] = Σ_{j < i} deltas[j].at · deltas[j].mass
    prefix_moment: Vec<f64>,
    terms: Vec<Term>,
}

impl CoefficientFunction {
    pub fn zero() -> Self {
        Self::from_sorted(Vec::new(), Vec::new())
    }

    /// Builds from point masses and weighted densities. Point masses at the
    /// same location are combined.
    pub fn new(deltas: Vec<Delta>, terms: Vec<Term>) -> Result<Self> {
        for d in &deltas {
            if !(d.at.is_finite() && d.at > 0.0) {
                return Err(invalid(format!("point mass location must be positive, got {}", d.at)));
            }
            if !(d.mass.is_finite() && d.mass >= 0.0) {
                return Err(invalid(format!("point mass must be nonnegative, got {}", d.mass)));
            }
        }
        for t in &terms {
            if !(t.weight.is_finite() && t.weight >= 0.0) {
                return Err(invalid(format!("term weight must be nonnegative, got {}", t.weight)));
            }
            t.density.validate()?;
        }
        let mut deltas: Vec<Delta> = deltas.into_iter().filter(|d| d.mass > 0.0).collect();
        deltas.sort_by(|a, b| a.at.total_cmp(&b.at));
        let mut merged: Vec<Delta> = Vec::with_capacity(deltas.len());
        for d in deltas {
            match merged.last_mut() {
                Some(last) if last.at == d.at => last.mass += d.mass,
                _ => merged.push(d),
            }
        }
        let terms = terms.into_iter().filter(|t| t.weight > 0.0).collect();
        Ok(Self::from_sorted(merged, terms))
    }

    fn from_sorted(deltas: Vec<Delta>, terms: Vec<Term>) -> Self {
        let mut suffix = vec![0.0; deltas.len() + 1];
        for i in (0..deltas.len()).rev() {
            suffix[i] = suffix[i + 1] + deltas[i].mass;
        }
        let mut prefix_moment = vec![0.0; deltas.len() + 1];
        for i in 0..deltas.len() {
            prefix_moment[i + 1] = prefix_moment[i] + deltas[i].at * deltas[i].mass;
        }
        Self {
            deltas,
            suffix,
            prefix_moment,
            terms,
        }
    }

    pub fn point(at: f64, mass: f64) -> Result<Self> {
        Self::new(vec![Delta { at, mass }], Vec::new())
    }

    pub fn density_term(weight: f64, density: Density) -> Result<Self> {
        Self::new(Vec::new(), vec![Term { weight, density }])
    }

    pub fn deltas(&self) -> &[Delta] {
        &self.deltas
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.deltas.is_empty() && self.terms.is_empty()
    }

    pub fn is_discrete(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sum of two coefficient functions.
    pub fn plus(&self, other: &Self) -> Self {
        let mut deltas = self.deltas.clone();
        deltas.extend_from_slice(&other.deltas);
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::new(deltas, terms).expect("sum of valid coefficient functions is valid")
    }

    /// Multiplies every mass and weight by `factor >= 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor >= 0.0) {
            return Err(invalid(format!("scale factor must be nonnegative, got {factor}")));
        }
        let deltas = self
            .deltas
            .iter()
            .map(|d| Delta { at: d.at, mass: d.mass * factor })
            .collect();
        let terms = self
            .terms
            .iter()
            .map(|t| Term { weight: t.weight * factor, density: t.density.clone() })
            .collect();
        Self::new(deltas, terms)
    }

    /// Continuous density at `t` (point masses excluded).
    pub fn density(&self, t: f64) -> f64 {
        self.terms.iter().map(|term| term.weight * term.density.density(t)).sum()
    }

    /// `∫_τ^∞ a(t) dt`, point masses at exactly `τ` included. Returns `+∞`
    /// when the mass near zero diverges and `τ = 0`.
    pub fn tail_raw(&self, tau: f64) -> f64 {
        let idx = self.deltas.partition_point(|d| d.at < tau);
        let mut total = self.suffix[idx];
        for term in &self.terms {
            total += term.weight * term.density.tail(tau);
        }
        total
    }

    /// `∫_τ^∞ a(t) dt` as a checked value.
    pub fn tail_integral(&self, tau: f64) -> Result<f64> {
        if !(tau >= 0.0) {
            return Err(invalid(format!("threshold must be nonnegative, got {tau}")));
        }
        let v = self.tail_raw(tau);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::IllPosed(format!("tail integral diverges at {tau}")))
        }
    }

    /// `∫_0^τ a(t) t dt`, point masses at exactly `τ` included.
    pub fn head_integral(&self, tau: f64) -> Result<f64> {
        if !(tau >= 0.0) {
            return Err(invalid(format!("threshold must be nonnegative, got {tau}")));
        }
        let idx = self.deltas.partition_point(|d| d.at <= tau);
        let mut total = self.prefix_moment[idx];
        for term in &self.terms {
            total += term.weight * term.density.head(tau);
        }
        if total.is_finite() {
            Ok(total)
        } else {
            Err(Error::IllPosed(format!("head integral diverges at {tau}")))
        }
    }

    /// `∫_{[0,τ)} a(t) t dt`: as [`head_integral`](Self::head_integral) but
    /// without point masses at exactly `τ`.
    pub fn head_integral_below(&self, tau: f64) -> Result<f64> {
        let at_tau: f64 = self
            .deltas
            .iter()
            .filter(|d| d.at == tau)
            .map(|d| d.at * d.mass)
            .sum();
        Ok(self.head_integral(tau)? - at_tau)
    }

    /// The complement-Laplace transform of the coefficients:
    /// `∫_0^∞ a(t) (1 - e^{-wt}) dt`.
    pub fn transform(&self, w: f64) -> f64 {
        let discrete: f64 = self
            .deltas
            .iter()
            .map(|d| -d.mass * (-w * d.at).exp_m1())
            .sum();
        let continuous: f64 = self
            .terms
            .iter()
            .map(|term| term.weight * term.density.transform(w))
            .sum();
        discrete + continuous
    }

    /// `∫_0^∞ a(t) min(t, w) dt`, the value of the capping-span function with
    /// these coefficients.
    pub fn capped(&self, w: f64) -> f64 {
        let discrete: f64 = self.deltas.iter().map(|d| d.mass * d.at.min(w)).sum();
        let continuous: f64 = self
            .terms
            .iter()
            .map(|term| term.weight * (term.density.head(w) + w * term.density.tail(w)))
            .sum();
        discrete + continuous
    }

    /// Total mass `∫_0^∞ a(t) dt`, possibly infinite.
    pub fn total_mass(&self) -> f64 {
        self.tail_raw(0.0)
    }
}

impl Default for CoefficientFunction {
    fn default() -> Self {
        Self::zero()
    }
}
