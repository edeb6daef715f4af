//! Statistic descriptors: `capT=5`, `softcapT=5`, `moment=0.5`, `sqrt`,
//! `log1p`, `cmoment=0.5`, `cap1approx=A:1.5,b1:0.6,b2:7.97`, `distinct`,
//! `sum`.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Approximations of `cap₁(w) = min(1, w)` by a signed sum of soft caps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cap1Approx {
    /// `1 - e^{-w}`.
    Soft,
    /// `2e/(2e-1) · (1 - e^{-w})`.
    ScaledSoft,
    /// `(A+1)(1-e^{-w}) - α₁(1-e^{-β₁w}) - α₂(1-e^{-β₂w})`.
    ThreePoint { a: f64, beta1: f64, beta2: f64 },
}

impl Cap1Approx {
    /// Smaller error, larger stability factor.
    pub const LOW_ERROR: Cap1Approx = Cap1Approx::ThreePoint { a: 10.0, beta1: 0.9, beta2: 3.75 };
    /// Slightly larger error, stability factor under 3.
    pub const LOW_RHO: Cap1Approx = Cap1Approx::ThreePoint { a: 1.5, beta1: 0.6, beta2: 7.97 };
}

impl fmt::Display for Cap1Approx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cap1Approx::Soft => write!(f, "soft"),
            Cap1Approx::ScaledSoft => write!(f, "scaledsoft"),
            Cap1Approx::ThreePoint { a, beta1, beta2 } => write!(f, "A:{a},b1:{beta1},b2:{beta2}"),
        }
    }
}

impl FromStr for Cap1Approx {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "soft" => return Ok(Cap1Approx::Soft),
            "scaledsoft" => return Ok(Cap1Approx::ScaledSoft),
            _ => {}
        }
        let (mut a, mut b1, mut b2) = (None, None, None);
        for part in s.split(',') {
            let (name, value) = part
                .split_once(':')
                .ok_or_else(|| invalid(format!("expected name:value, got `{part}`")))?;
            let value = parse_num(value)?;
            match name.trim() {
                "A" => a = Some(value),
                "b1" => b1 = Some(value),
                "b2" => b2 = Some(value),
                other => return Err(invalid(format!("unknown cap1approx parameter `{other}`"))),
            }
        }
        match (a, b1, b2) {
            (Some(a), Some(beta1), Some(beta2)) => Ok(Cap1Approx::ThreePoint { a, beta1, beta2 }),
            _ => Err(invalid("cap1approx needs A, b1 and b2")),
        }
    }
}

/// A frequency statistic `Σ_x f(w_x)`, identified by `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Statistic {
    /// `min(T, w)`.
    Cap { t: f64 },
    /// `T(1 - e^{-w/T})`.
    SoftCap { t: f64 },
    /// `w^p`, `p ∈ (0,1)`.
    Moment { p: f64 },
    /// `√w`.
    Sqrt,
    /// `ln(1 + w)`.
    Log1p,
    /// `min(w, w^p)`.
    ClippedMoment { p: f64 },
    /// `min(1, w)` estimated through the given approximation.
    Cap1(Cap1Approx),
    /// Number of keys.
    Distinct,
    /// `w`.
    Sum,
}

impl Statistic {
    /// `f(w)`.
    pub fn value(&self, w: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        match *self {
            Statistic::Cap { t } => w.min(t),
            Statistic::SoftCap { t } => -t * (-w / t).exp_m1(),
            Statistic::Moment { p } => w.powf(p),
            Statistic::Sqrt => w.sqrt(),
            Statistic::Log1p => w.ln_1p(),
            Statistic::ClippedMoment { p } => w.min(w.powf(p)),
            Statistic::Cap1(_) => w.min(1.0),
            Statistic::Distinct => 1.0,
            Statistic::Sum => w,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Statistic::Cap { t } | Statistic::SoftCap { t } => {
                if !(t.is_finite() && t > 0.0) {
                    return Err(invalid(format!("cap threshold must be positive, got {t}")));
                }
            }
            Statistic::Moment { p } | Statistic::ClippedMoment { p } => {
                if !(p > 0.0 && p < 1.0) {
                    return Err(invalid(format!("moment exponent must lie in (0,1), got {p}")));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

fn parse_num(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| invalid(format!("not a number: `{s}`")))
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let stat = match s.split_once('=') {
            None => match s {
                "sqrt" => Statistic::Sqrt,
                "log1p" => Statistic::Log1p,
                "distinct" => Statistic::Distinct,
                "sum" => Statistic::Sum,
                _ => return Err(Error::UnsupportedStatistic(s.to_string())),
            },
            Some((name, arg)) => match name {
                "capT" => Statistic::Cap { t: parse_num(arg)? },
                "softcapT" => Statistic::SoftCap { t: parse_num(arg)? },
                "moment" => Statistic::Moment { p: parse_num(arg)? },
                "cmoment" => Statistic::ClippedMoment { p: parse_num(arg)? },
                "cap1approx" => Statistic::Cap1(arg.parse()?),
                _ => return Err(Error::UnsupportedStatistic(s.to_string())),
            },
        };
        stat.validate()?;
        Ok(stat)
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistic::Cap { t } => write!(f, "capT={t}"),
            Statistic::SoftCap { t } => write!(f, "softcapT={t}"),
            Statistic::Moment { p } => write!(f, "moment={p}"),
            Statistic::Sqrt => write!(f, "sqrt"),
            Statistic::Log1p => write!(f, "log1p"),
            Statistic::ClippedMoment { p } => write!(f, "cmoment={p}"),
            Statistic::Cap1(v) => write!(f, "cap1approx={v}"),
            Statistic::Distinct => write!(f, "distinct"),
            Statistic::Sum => write!(f, "sum"),
        }
    }
}
