//! Closed-form deviation, Λ and hitting-time bounds implied by a
//! hypocoercivity constant ρ.
//!
//! Notation: `V` is a bounded observable, `‖V‖₂` its norm in L²(μ), `‖V‖∞`
//! its sup norm and `‖dν/dμ‖₂` the L²(μ) norm of the initial density. With
//!
//! ```text
//! h(r)  = ρ r² / (25 ‖V‖₂² + 6 ‖V‖∞ r)
//! λ₀    = 2ρ / (3 ‖V‖∞)
//! β     = 25 ‖V‖₂² / (6 ‖V‖∞)
//! ```
//!
//! the tail of the time average of `V` over `[0, t]` is at most
//! `√2 ‖dν/dμ‖₂ e^{−t h(r)}`, and `h(r) = λ₀r²/(4(β+r))` lower-bounds the
//! Legendre transform `sup_λ {λr − βλ²/(λ₀−λ)}`.

use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use crate::{Error, Result};

/// A nonnegative quantity that may be `+∞`.
///
/// Infinite values never leak into float arithmetic; callers match on the
/// variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(x) => Some(x),
            Extended::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Extended::Infinite)
    }
}

/// Which norms of `V` enter the rate.
///
/// `Uncentered` uses `V` itself; `Centered` uses `V − μV`. The hitting-time
/// bound applies the rate to `V = −1_U` with uncentered norms, which is why
/// that convention is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormConvention {
    #[default]
    Uncentered,
    Centered,
}

/// Inputs shared by every bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    rho: f64,
    v_l2: f64,
    v_inf: f64,
    #[serde(alias = "prefactor")]
    density_norm: f64,
}

// Slack for the ‖V‖₂ ≤ ‖V‖∞ check when norms come from floating quadrature.
const NORM_ORDER_SLACK: f64 = 1e-12;

impl BoundInputs {
    /// `density_norm` is `‖dν/dμ‖₂` (1 when ν = μ); the bounds multiply it by √2.
    pub fn new(rho: f64, v_l2: f64, v_inf: f64, density_norm: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::domain(format!("rho must be positive and finite, got {rho}")));
        }
        if !(v_inf >= 0.0 && v_inf.is_finite()) {
            return Err(Error::domain(format!("‖V‖∞ must be nonnegative, got {v_inf}")));
        }
        if !(v_l2 >= 0.0) {
            return Err(Error::domain(format!("‖V‖₂ must be nonnegative, got {v_l2}")));
        }
        if v_l2 > v_inf * (1.0 + NORM_ORDER_SLACK) + NORM_ORDER_SLACK {
            return Err(Error::domain(format!(
                "‖V‖₂ = {v_l2} exceeds ‖V‖∞ = {v_inf}; impossible under a probability measure"
            )));
        }
        if !(density_norm >= 0.0 && density_norm.is_finite()) {
            return Err(Error::domain(format!(
                "‖dν/dμ‖₂ must be nonnegative, got {density_norm}"
            )));
        }
        Ok(Self {
            rho,
            v_l2: v_l2.min(v_inf),
            v_inf,
            density_norm,
        })
    }

    /// The `V = −1_U` convention: `‖V‖₂² = μ(U)`, `‖V‖∞ = 1`.
    pub fn for_indicator(rho: f64, mu_u: f64, density_norm: f64) -> Result<Self> {
        if !(mu_u > 0.0 && mu_u <= 1.0) {
            return Err(Error::domain(format!("μ(U) must lie in (0, 1], got {mu_u}")));
        }
        Self::new(rho, mu_u.sqrt(), 1.0, density_norm)
    }

    /// Norms of an observable known through weighted samples of a probability
    /// measure (e.g. grid values and cell weights).
    pub fn from_weighted_values(
        rho: f64,
        values: &[f64],
        weights: &[f64],
        convention: NormConvention,
        density_norm: f64,
    ) -> Result<Self> {
        if values.is_empty() || values.len() != weights.len() {
            return Err(Error::usage("values and weights must be nonempty and of equal length"));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::usage("weights must be nonnegative with positive total"));
        }
        let mean = values.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / total;
        let shift = match convention {
            NormConvention::Uncentered => 0.0,
            NormConvention::Centered => mean,
        };
        let second = values
            .iter()
            .zip(weights)
            .map(|(v, w)| w * (v - shift).powi(2))
            .sum::<f64>()
            / total;
        let sup = values
            .iter()
            .zip(weights)
            .filter(|(_, w)| **w > 0.0)
            .fold(0.0_f64, |m, (v, _)| m.max((v - shift).abs()));
        Self::new(rho, second.max(0.0).sqrt(), sup, density_norm)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn v_l2(&self) -> f64 {
        self.v_l2
    }

    pub fn v_inf(&self) -> f64 {
        self.v_inf
    }

    pub fn density_norm(&self) -> f64 {
        self.density_norm
    }

    pub fn with_rho(self, rho: f64) -> Result<Self> {
        Self::new(rho, self.v_l2, self.v_inf, self.density_norm)
    }

    /// `λ₀ = 2ρ/(3‖V‖∞)`, infinite when `V ≡ 0`.
    pub fn lambda0(&self) -> Extended {
        if self.v_inf > 0.0 {
            Extended::Finite(2.0 * self.rho / (3.0 * self.v_inf))
        } else {
            Extended::Infinite
        }
    }

    /// `β = 25‖V‖₂²/(6‖V‖∞)`, taken as 0 when `V ≡ 0`.
    pub fn beta(&self) -> f64 {
        if self.v_inf > 0.0 {
            25.0 * self.v_l2 * self.v_l2 / (6.0 * self.v_inf)
        } else {
            0.0
        }
    }
}

/// Everything [`report`] evaluates for one `(r, inputs)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub h_of_r: f64,
    pub lambda0: Extended,
    pub beta: f64,
    pub lambda_upper: Extended,
    pub decay_rate: f64,
    pub decay_prefactor: f64,
}

/// `h(r) = ρr²/(25‖V‖₂² + 6‖V‖∞ r)`.
pub fn h_rate(r: f64, inputs: &BoundInputs) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("r must be finite and nonnegative, got {r}")));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    let denom = 25.0 * inputs.v_l2 * inputs.v_l2 + 6.0 * inputs.v_inf * r;
    if denom == 0.0 {
        return Err(Error::domain(
            "degenerate observable: V ≡ 0 makes h(r) undefined for r > 0",
        ));
    }
    Ok(inputs.rho * r * r / denom)
}

/// Upper bound on `Λ(V)`: `25‖V‖₂²/(4ρ − 6‖V‖∞)` if `3‖V‖∞ < 2ρ`, else `+∞`.
pub fn lambda_upper(inputs: &BoundInputs) -> Extended {
    if 3.0 * inputs.v_inf < 2.0 * inputs.rho {
        Extended::Finite(25.0 * inputs.v_l2 * inputs.v_l2 / (4.0 * inputs.rho - 6.0 * inputs.v_inf))
    } else {
        Extended::Infinite
    }
}

/// Exact value of `sup_{λ∈[0,λ₀)} {λr − βλ²/(λ₀−λ)}`.
///
/// Evaluated as `λ₀r²/(√β + √(β+r))²`, which equals
/// `λ₀r²/(β(1+√(1+r/β))²)` and stays finite as β → 0 (where the supremum is
/// `λ₀r`).
pub fn legendre_rate(r: f64, lambda0: f64, beta: f64) -> Result<f64> {
    if !(lambda0 > 0.0) || !(beta >= 0.0) || !(r >= 0.0) {
        return Err(Error::domain(format!(
            "need λ₀ > 0, β ≥ 0, r ≥ 0; got ({lambda0}, {beta}, {r})"
        )));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    let s = beta.sqrt() + (beta + r).sqrt();
    Ok(lambda0 * r * r / (s * s))
}

/// `√2 ‖dν/dμ‖₂ e^{−t h(r)}`, deliberately not clamped to 1.
pub fn deviation_bound(t: f64, r: f64, inputs: &BoundInputs) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("t must be positive, got {t}")));
    }
    let h = h_rate(r, inputs)?;
    Ok(SQRT_2 * inputs.density_norm * (-t * h).exp())
}

/// `1 + √2 ‖dν/dμ‖₂ θ/(h(μ(U)) − θ)` with the `V = −1_U` norms.
///
/// Only `ρ` and `‖dν/dμ‖₂` are read from `inputs`.
pub fn hitting_bound(theta: f64, mu_u: f64, inputs: &BoundInputs) -> Result<f64> {
    let indicator = BoundInputs::for_indicator(inputs.rho, mu_u, inputs.density_norm)?;
    let h = h_rate(mu_u, &indicator)?;
    if !(theta > 0.0) {
        return Err(Error::domain(format!("theta must be positive, got {theta}")));
    }
    if theta >= h {
        return Err(Error::domain(format!(
            "theta above admissible rate: θ = {theta} ≥ h(μ(U)) = {h}"
        )));
    }
    Ok(1.0 + SQRT_2 * inputs.density_norm * theta / (h - theta))
}

/// The rate `h(μ(U))` of the hitting-time bound.
pub fn hitting_rate(mu_u: f64, rho: f64) -> Result<f64> {
    let indicator = BoundInputs::for_indicator(rho, mu_u, 1.0)?;
    h_rate(mu_u, &indicator)
}

/// `√3 e^{−2ρt/3}`.
pub fn decay_envelope(t: f64, rho: f64) -> Result<f64> {
    if !(t >= 0.0) || !(rho > 0.0) {
        return Err(Error::domain(format!("need t ≥ 0 and ρ > 0; got t = {t}, ρ = {rho}")));
    }
    Ok(3.0_f64.sqrt() * (-2.0 * rho * t / 3.0).exp())
}

pub fn report(r: f64, inputs: &BoundInputs) -> Result<BoundReport> {
    Ok(BoundReport {
        h_of_r: h_rate(r, inputs)?,
        lambda0: inputs.lambda0(),
        beta: inputs.beta(),
        lambda_upper: lambda_upper(inputs),
        decay_rate: 2.0 * inputs.rho / 3.0,
        decay_prefactor: 3.0_f64.sqrt(),
    })
}

/// Exact rational evaluation of the rational formulas.
///
/// `‖V‖₂` enters only squared, so inputs take `‖V‖₂²` directly.
pub mod exact {
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{Signed, Zero};

    pub type Q = BigRational;

    pub fn q(num: i64, den: i64) -> Q {
        Q::new(BigInt::from(num), BigInt::from(den))
    }

    /// `ρr²/(25‖V‖₂² + 6‖V‖∞ r)`; `None` for the degenerate observable.
    pub fn h_rate(r: &Q, rho: &Q, v_l2_sq: &Q, v_inf: &Q) -> Option<Q> {
        if r.is_zero() {
            return Some(Q::zero());
        }
        let denom = q(25, 1) * v_l2_sq + q(6, 1) * v_inf * r;
        (!denom.is_zero()).then(|| rho * r * r / denom)
    }

    /// `Some(25‖V‖₂²/(4ρ − 6‖V‖∞))` when `3‖V‖∞ < 2ρ`, else `None` (= +∞).
    pub fn lambda_upper(rho: &Q, v_l2_sq: &Q, v_inf: &Q) -> Option<Q> {
        let gap = q(4, 1) * rho - q(6, 1) * v_inf;
        gap.is_positive().then(|| q(25, 1) * v_l2_sq / gap)
    }

    pub fn lambda0(rho: &Q, v_inf: &Q) -> Option<Q> {
        (!v_inf.is_zero()).then(|| q(2, 1) * rho / (q(3, 1) * v_inf))
    }

    pub fn beta(v_l2_sq: &Q, v_inf: &Q) -> Option<Q> {
        (!v_inf.is_zero()).then(|| q(25, 1) * v_l2_sq / (q(6, 1) * v_inf))
    }

    /// `λ₀r²/(4(β+r))`, the form in which `h` arises from the Legendre bound.
    pub fn h_from_legendre(r: &Q, lambda0: &Q, beta: &Q) -> Q {
        lambda0 * r * r / (q(4, 1) * (beta + r))
    }
}
