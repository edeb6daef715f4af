//! The complement-Laplace transform, inverse transforms of common
//! statistics, capping transforms, and signed approximate inverse transforms
//! for hard capping.

mod coefficient;
pub mod special;
mod statistic;

use std::f64::consts::E;

pub use coefficient::{CoefficientFunction, Delta, Density, Term};
pub use statistic::{Cap1Approx, Statistic};

use crate::element::FrequencyDistribution;
use crate::error::{invalid, Error, Result};

/// `Σ_w W(w) (1 - e^{-wt})`.
pub fn laplace_c(dist: &FrequencyDistribution, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(invalid(format!("transform point must be nonnegative, got {t}")));
    }
    Ok(dist.iter().map(|(w, c)| -(c as f64) * (-w * t).exp_m1()).sum())
}

/// `T (1 - e^{-w/T})`.
pub fn soft_cap(t: f64, w: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid(format!("soft cap threshold must be positive, got {t}")));
    }
    if !(w >= 0.0) {
        return Err(invalid(format!("weight must be nonnegative, got {w}")));
    }
    Ok(-t * (-w / t).exp_m1())
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Probe grid on which stability factors are certified.
pub fn rho_grid() -> Vec<f64> {
    log_grid(1e-4, 1e4, 200)
}

/// Grid on which cap₁ approximation errors are certified.
pub fn relerr_grid() -> Vec<f64> {
    log_grid(1e-4, 1e4, 4001)
}

/// Inverse complement-Laplace transform of a statistic in the soft-cap span.
pub fn inverse_transform(stat: &Statistic) -> Result<CoefficientFunction> {
    stat.validate()?;
    match *stat {
        Statistic::SoftCap { t } => CoefficientFunction::point(1.0 / t, t),
        Statistic::Moment { p } => CoefficientFunction::density_term(1.0, Density::Moment { p }),
        Statistic::Sqrt => CoefficientFunction::density_term(1.0, Density::Moment { p: 0.5 }),
        Statistic::Log1p => CoefficientFunction::density_term(1.0, Density::Log1p),
        _ => Err(Error::UnsupportedStatistic(format!(
            "{stat} has no nonnegative inverse transform"
        ))),
    }
}

/// `f(x) = A_∞ x + ∫ a(t) min(t, x) dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct CappingTransform {
    pub a_inf: f64,
    pub coef: CoefficientFunction,
}

impl CappingTransform {
    /// Reconstructs `f(w)` from the transform.
    pub fn evaluate(&self, w: f64) -> f64 {
        self.a_inf * w + self.coef.capped(w)
    }

    /// `∂₊f(0) = A_∞ + ∫ a`.
    pub fn right_derivative_at_zero(&self) -> f64 {
        self.a_inf + self.coef.total_mass()
    }
}

/// Capping transform of a concave sublinear statistic.
pub fn capping_transform(stat: &Statistic) -> Result<CappingTransform> {
    stat.validate()?;
    let (a_inf, coef) = match *stat {
        Statistic::Cap { t } => (0.0, CoefficientFunction::point(t, 1.0)?),
        Statistic::Sum => (1.0, CoefficientFunction::zero()),
        Statistic::ClippedMoment { p } => (
            0.0,
            CoefficientFunction::new(
                vec![Delta { at: 1.0, mass: 1.0 - p }],
                vec![Term { weight: 1.0, density: Density::PowerTail { p } }],
            )?,
        ),
        Statistic::SoftCap { t } => (
            0.0,
            CoefficientFunction::density_term(1.0, Density::ExpDensity { scale: t })?,
        ),
        Statistic::Log1p => (0.0, CoefficientFunction::density_term(1.0, Density::InverseSquare)?),
        _ => {
            return Err(Error::UnsupportedStatistic(format!(
                "{stat} has no tabulated capping transform"
            )))
        }
    };
    Ok(CappingTransform { a_inf, coef })
}

/// A signed approximate inverse transform `a = a₊ - a₋`, plus a linear
/// coefficient estimated directly from the element sum.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedCoefficientFunction {
    pub plus: CoefficientFunction,
    pub minus: CoefficientFunction,
    /// Coefficient of `w`, contributed exactly through `SUM(W)`.
    pub linear: f64,
    /// Stability factor certified on [`rho_grid`].
    pub rho_bound: f64,
    /// Worst relative error of the represented function against its target,
    /// zero when the transform is exact.
    pub approx_relerr: f64,
}

impl SignedCoefficientFunction {
    pub fn new(
        plus: CoefficientFunction,
        minus: CoefficientFunction,
        linear: f64,
        approx_relerr: f64,
    ) -> Result<Self> {
        if !(linear.is_finite() && linear >= 0.0) {
            return Err(invalid(format!("linear coefficient must be nonnegative, got {linear}")));
        }
        let mut out = Self {
            plus,
            minus,
            linear,
            rho_bound: 1.0,
            approx_relerr,
        };
        out.rho_bound = rho_estimate(&out, &rho_grid())?;
        Ok(out)
    }

    /// An exact nonnegative transform.
    pub fn nonnegative(a: CoefficientFunction) -> Result<Self> {
        Self::new(a, CoefficientFunction::zero(), 0.0, 0.0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.minus.is_zero()
    }

    pub fn is_discrete(&self) -> bool {
        self.plus.is_discrete() && self.minus.is_discrete()
    }

    /// `linear · w + LapM[a₊](w) - LapM[a₋](w)`.
    pub fn transform(&self, w: f64) -> f64 {
        self.linear * w + self.plus.transform(w) - self.minus.transform(w)
    }
}

/// `ρ(a) = max_w max(LapM[a₊](w), LapM[a₋](w)) / LapM[a](w)` over `grid`.
pub fn rho_estimate(a: &SignedCoefficientFunction, grid: &[f64]) -> Result<f64> {
    if grid.is_empty() {
        return Err(invalid("probe grid is empty"));
    }
    let mut rho: f64 = 1.0;
    if a.minus.is_zero() {
        return Ok(rho);
    }
    for &w in grid {
        let p = a.plus.transform(w);
        let m = a.minus.transform(w);
        let f = a.linear * w + p - m;
        if !(f > 0.0) {
            return Err(Error::IllPosed(format!(
                "signed transform is not positive at w = {w} (value {f})"
            )));
        }
        rho = rho.max(p / f).max(m / f);
    }
    Ok(rho)
}

/// `max_w |f(w) - g(w)| / f(w)` over `grid`.
pub fn relerr_on_grid<F, G>(f: F, g: G, grid: &[f64]) -> f64
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    grid.iter()
        .map(|&w| {
            let fw = f(w);
            (fw - g(w)).abs() / fw
        })
        .fold(0.0, f64::max)
}

/// Signed inverse transform approximating `cap₁(w) = min(1, w)`.
pub fn cap1_approximation(variant: Cap1Approx) -> Result<SignedCoefficientFunction> {
    let (plus, minus) = match variant {
        Cap1Approx::Soft => (CoefficientFunction::point(1.0, 1.0)?, CoefficientFunction::zero()),
        Cap1Approx::ScaledSoft => (
            CoefficientFunction::point(1.0, 2.0 * E / (2.0 * E - 1.0))?,
            CoefficientFunction::zero(),
        ),
        Cap1Approx::ThreePoint { a, beta1, beta2 } => {
            if !(a.is_finite() && a > 0.0) {
                return Err(invalid(format!("A must be positive, got {a}")));
            }
            if beta1 == beta2 {
                return Err(invalid("degenerate three-point approximation: b1 = b2"));
            }
            if !(beta1 > 0.0 && beta1 < 1.0 && beta2 > 1.0 && beta2.is_finite()) {
                return Err(invalid(format!(
                    "three-point approximation needs 0 < b1 < 1 < b2, got b1 = {beta1}, b2 = {beta2}"
                )));
            }
            let (alpha1, alpha2) = three_point_masses(a, beta1, beta2);
            (
                CoefficientFunction::point(1.0, a + 1.0)?,
                CoefficientFunction::new(
                    vec![Delta { at: beta1, mass: alpha1 }, Delta { at: beta2, mass: alpha2 }],
                    vec![],
                )?,
            )
        }
    };
    let plus_c = plus.clone();
    let minus_c = minus.clone();
    let relerr = relerr_on_grid(
        |w| w.min(1.0),
        |w| plus_c.transform(w) - minus_c.transform(w),
        &relerr_grid(),
    );
    SignedCoefficientFunction::new(plus, minus, 0.0, relerr)
}

/// `(α₁, α₂)` solving `A - α₁ - α₂ = 0` and `A - α₁β₁ - α₂β₂ = 0`.
pub fn three_point_masses(a: f64, beta1: f64, beta2: f64) -> (f64, f64) {
    let span = beta2 - beta1;
    (a * (beta2 - 1.0) / span, a * (1.0 - beta1) / span)
}

/// Lifts a discrete cap₁ approximation `α` to an approximate inverse
/// transform of the statistic with capping transform `capping`:
/// `c(x) = ∫ a(T) α_T(x) dT`, where `α_T` approximates `cap_T`.
///
/// A point mass `m` of `α` at `s` becomes, for a capping point mass `A` at
/// `T`, a point mass `m A T` at `s / T`; continuous capping densities become
/// [`Density::Lifted`] terms with closed-form tail and head integrals.
pub fn lift_cap1_to_f(
    capping: &CappingTransform,
    alpha: &SignedCoefficientFunction,
) -> Result<SignedCoefficientFunction> {
    if !alpha.is_discrete() {
        return Err(Error::UnsupportedStatistic(
            "only discrete cap1 approximations can be lifted".into(),
        ));
    }
    if alpha.linear != 0.0 {
        return Err(invalid("cap1 approximation must not carry a linear term"));
    }
    let lift = |part: &CoefficientFunction| -> (Vec<Delta>, Vec<Term>) {
        let mut deltas = Vec::new();
        let mut terms = Vec::new();
        for d in part.deltas() {
            for cd in capping.coef.deltas() {
                deltas.push(Delta { at: d.at / cd.at, mass: d.mass * cd.mass * cd.at });
            }
            for term in capping.coef.terms() {
                terms.push(Term {
                    weight: term.weight,
                    density: Density::Lifted {
                        base: Box::new(term.density.clone()),
                        at: d.at,
                        mass: d.mass,
                    },
                });
            }
        }
        (deltas, terms)
    };
    let (mut plus_d, plus_t) = lift(&alpha.plus);
    let (mut minus_d, minus_t) = lift(&alpha.minus);
    net_coincident(&mut plus_d, &mut minus_d);
    SignedCoefficientFunction::new(
        CoefficientFunction::new(plus_d, plus_t)?,
        CoefficientFunction::new(minus_d, minus_t)?,
        capping.a_inf,
        alpha.approx_relerr,
    )
}

/// Cancels point masses that sit at the same location on both sides.
fn net_coincident(plus: &mut [Delta], minus: &mut [Delta]) {
    for p in plus.iter_mut() {
        for m in minus.iter_mut() {
            if p.at == m.at && p.mass > 0.0 && m.mass > 0.0 {
                let common = p.mass.min(m.mass);
                p.mass -= common;
                m.mass -= common;
            }
        }
    }
}

/// The transform used to estimate `stat`: exact when the statistic lies in
/// the soft-cap span, otherwise a lifted three-point cap₁ approximation.
pub fn estimation_transform(stat: &Statistic) -> Result<SignedCoefficientFunction> {
    stat.validate()?;
    match *stat {
        Statistic::SoftCap { .. } | Statistic::Moment { .. } | Statistic::Sqrt | Statistic::Log1p => {
            SignedCoefficientFunction::nonnegative(inverse_transform(stat)?)
        }
        Statistic::Sum => SignedCoefficientFunction::new(
            CoefficientFunction::zero(),
            CoefficientFunction::zero(),
            1.0,
            0.0,
        ),
        Statistic::Cap { .. } | Statistic::ClippedMoment { .. } => {
            lift_cap1_to_f(&capping_transform(stat)?, &cap1_approximation(Cap1Approx::LOW_RHO)?)
        }
        Statistic::Cap1(variant) => cap1_approximation(variant),
        Statistic::Distinct => Err(Error::UnsupportedStatistic(
            "distinct count is not sketched through a coefficient transform".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> FrequencyDistribution {
        FrequencyDistribution::from_counts([(1.0, 10), (5.0, 2), (10.0, 1)]).unwrap()
    }

    fn fig2_closed(t: f64) -> f64 {
        13.0 - 10.0 * (-t).exp() - 2.0 * (-5.0 * t).exp() - (-10.0 * t).exp()
    }

    #[test]
    fn laplace_c_fig2() {
        let d = example();
        assert_eq!(laplace_c(&d, 0.0).unwrap(), 0.0);
        assert_eq!(laplace_c(&d, f64::INFINITY).unwrap(), 13.0);
        let v = laplace_c(&d, 1.0).unwrap();
        assert!((v - fig2_closed(1.0)).abs() < 1e-12);
        assert!((v - 9.3077).abs() < 1e-4);
        assert!(laplace_c(&d, -1.0).is_err());
    }

    #[test]
    fn soft_cap_values() {
        assert_eq!(soft_cap(1.0, 0.0).unwrap(), 0.0);
        assert!((soft_cap(1.0, 1.0).unwrap() - 0.632_120_558_828_557_7).abs() < 1e-15);
        assert!(soft_cap(0.0, 1.0).is_err());
        for &w in &[0.01, 0.1, 1.0, 10.0, 100.0] {
            let s = soft_cap(1.0, w).unwrap();
            let c = w.min(1.0);
            assert!((1.0 - 1.0 / E) * c <= s && s <= c);
        }
    }

    #[test]
    fn soft_cap_inverse_is_point_mass() {
        let a = inverse_transform(&Statistic::SoftCap { t: 4.0 }).unwrap();
        assert_eq!(a.deltas(), &[Delta { at: 0.25, mass: 4.0 }]);
        assert!(a.terms().is_empty());
        assert!(inverse_transform(&Statistic::Cap { t: 1.0 }).is_err());
    }

    #[test]
    fn capping_table_entries() {
        let cap = capping_transform(&Statistic::Cap { t: 3.0 }).unwrap();
        assert_eq!(cap.a_inf, 0.0);
        assert_eq!(cap.coef.deltas(), &[Delta { at: 3.0, mass: 1.0 }]);
        let id = capping_transform(&Statistic::Sum).unwrap();
        assert_eq!(id.a_inf, 1.0);
        assert!(id.coef.is_zero());
        assert!(matches!(
            capping_transform(&Statistic::Sqrt),
            Err(Error::UnsupportedStatistic(_))
        ));
    }

    #[test]
    fn capping_right_derivative() {
        for stat in [
            Statistic::Cap { t: 2.0 },
            Statistic::Sum,
            Statistic::ClippedMoment { p: 0.3 },
            Statistic::SoftCap { t: 7.0 },
            Statistic::Log1p,
        ] {
            let ct = capping_transform(&stat).unwrap();
            assert!((ct.right_derivative_at_zero() - 1.0).abs() < 1e-14, "{stat}");
        }
    }

    #[test]
    fn three_point_coefficients() {
        let (a1, a2) = three_point_masses(1.5, 0.6, 7.97);
        assert!((a1 - 1.5 * 6.97 / 7.37).abs() < 1e-15);
        assert!((a2 - 0.6 / 7.37).abs() < 1e-15);
        assert!((a1 + a2 - 1.5).abs() < 1e-15);
        assert!((a1 - 1.418_588_873_812_754).abs() < 1e-12);
        assert!((a2 - 0.081_411_126_187_245_6).abs() < 1e-12);
    }

    #[test]
    fn three_point_moment_conditions() {
        for variant in [Cap1Approx::LOW_ERROR, Cap1Approx::LOW_RHO] {
            let a = cap1_approximation(variant).unwrap();
            let mass: f64 = a.plus.deltas().iter().map(|d| d.mass).sum::<f64>()
                - a.minus.deltas().iter().map(|d| d.mass).sum::<f64>();
            let moment: f64 = a.plus.deltas().iter().map(|d| d.mass * d.at).sum::<f64>()
                - a.minus.deltas().iter().map(|d| d.mass * d.at).sum::<f64>();
            assert!((mass - 1.0).abs() < 1e-12);
            assert!((moment - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn three_point_rejects_degenerate() {
        let bad = |a, b1, b2| cap1_approximation(Cap1Approx::ThreePoint { a, beta1: b1, beta2: b2 });
        assert!(bad(1.0, 2.0, 2.0).is_err());
        assert!(bad(1.0, 1.5, 3.0).is_err());
        assert!(bad(0.0, 0.5, 3.0).is_err());
    }

    #[test]
    fn soft_variant_is_single_point() {
        let a = cap1_approximation(Cap1Approx::Soft).unwrap();
        assert_eq!(a.plus.deltas(), &[Delta { at: 1.0, mass: 1.0 }]);
        assert!(a.minus.is_zero());
        assert_eq!(a.rho_bound, 1.0);
        assert!((a.approx_relerr - 1.0 / E).abs() < 1e-3);
        let s = cap1_approximation(Cap1Approx::ScaledSoft).unwrap();
        assert!((s.approx_relerr - 1.0 / (2.0 * E - 1.0)).abs() < 1e-3);
    }

    #[test]
    fn three_point_quality() {
        let lo = cap1_approximation(Cap1Approx::LOW_ERROR).unwrap();
        assert!(lo.approx_relerr <= 0.12 && lo.rho_bound < 12.4, "{lo:?}");
        let hi = cap1_approximation(Cap1Approx::LOW_RHO).unwrap();
        assert!(hi.approx_relerr <= 0.15 && hi.rho_bound < 2.9, "{hi:?}");
    }

    #[test]
    fn lifting_cap_t_rescales() {
        let alpha = cap1_approximation(Cap1Approx::LOW_RHO).unwrap();
        let t = 5.0;
        let c = lift_cap1_to_f(&capping_transform(&Statistic::Cap { t }).unwrap(), &alpha).unwrap();
        assert!(c.is_discrete());
        let expect_plus: Vec<Delta> = alpha
            .plus
            .deltas()
            .iter()
            .map(|d| Delta { at: d.at / t, mass: d.mass * t })
            .collect();
        assert_eq!(c.plus.deltas(), expect_plus.as_slice());
        assert_eq!(c.minus.deltas().len(), 2);
        for (got, d) in c.minus.deltas().iter().zip(alpha.minus.deltas()) {
            assert!((got.at - d.at / t).abs() < 1e-15);
            assert!((got.mass - d.mass * t).abs() < 1e-12);
        }
        assert!((c.rho_bound - alpha.rho_bound).abs() < 1e-9);
    }

    #[test]
    fn rho_of_nonnegative_is_one() {
        let a = SignedCoefficientFunction::nonnegative(
            inverse_transform(&Statistic::Sqrt).unwrap(),
        )
        .unwrap();
        assert_eq!(a.rho_bound, 1.0);
        assert_eq!(rho_estimate(&a, &[1.0]).unwrap(), 1.0);
        assert!(rho_estimate(&a, &[]).is_err());
    }

    #[test]
    fn rho_rejects_non_positive_transform() {
        let a = SignedCoefficientFunction {
            plus: CoefficientFunction::point(1.0, 1.0).unwrap(),
            minus: CoefficientFunction::point(1.0, 2.0).unwrap(),
            linear: 0.0,
            rho_bound: 1.0,
            approx_relerr: 0.0,
        };
        assert!(matches!(rho_estimate(&a, &[1.0]), Err(Error::IllPosed(_))));
    }
}
