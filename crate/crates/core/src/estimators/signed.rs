use crate::transforms::SignedCoefficientFunction;

/// A signed estimate `f̂₊ - f̂₋` with its error certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedEstimate {
    /// The estimate, clamped at zero.
    pub value: f64,
    /// The difference before clamping.
    pub raw: f64,
    /// Set when `raw` was negative.
    pub clamped: bool,
    /// Stability factor of the transform.
    pub rho: f64,
    /// Relative error bound `ρ (ε₊ + ε₋)` given component errors `ε₊`, `ε₋`.
    pub error_bound: f64,
    /// Worst relative error of the transform against the target statistic.
    pub approx_relerr: f64,
}

/// Combines component estimates of `a₊` (including any linear term) and
/// `a₋`. `eps_minus` is ignored when `a₋` is empty.
pub fn signed_estimate(
    plus: f64,
    minus: f64,
    a: &SignedCoefficientFunction,
    eps_plus: f64,
    eps_minus: f64,
) -> SignedEstimate {
    let raw = plus - minus;
    let eps = if a.minus.is_zero() { eps_plus } else { eps_plus + eps_minus };
    SignedEstimate {
        value: raw.max(0.0),
        raw,
        clamped: raw < 0.0,
        rho: a.rho_bound,
        error_bound: a.rho_bound * eps,
        approx_relerr: a.approx_relerr,
    }
}
