use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A twice-differentiable potential on ℝᵈ.
pub trait Potential: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], out: &mut [f64]);
    fn laplacian(&self, x: &[f64]) -> f64;
    /// Operator norm of the Hessian.
    fn hessian_norm(&self, x: &[f64]) -> f64;

    fn gradient_norm_sq(&self, x: &[f64]) -> f64 {
        let mut g = vec![0.0; x.len()];
        self.gradient(x, &mut g);
        g.iter().map(|v| v * v).sum()
    }
}

/// Separable polynomial potential `U(x) = Σᵢ p(xᵢ)` with
/// `p(y) = Σₖ coeffs[k] yᵏ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialPotential {
    pub dim: usize,
    pub coeffs: Vec<f64>,
}

impl PolynomialPotential {
    pub fn new(dim: usize, coeffs: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("potential dimension must be at least 1"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::config("potential coefficients must be finite"));
        }
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Ok(Self { dim, coeffs })
    }

    /// `|x|²/2`.
    pub fn quadratic(dim: usize) -> Self {
        Self {
            dim,
            coeffs: vec![0.0, 0.0, 0.5],
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// True when `e^{−p}` is integrable on ℝ: even degree ≥ 2, positive leading term.
    pub fn is_confining(&self) -> bool {
        let d = self.degree();
        d >= 2 && d.is_multiple_of(2) && self.coeffs[d] > 0.0
    }

    pub fn p(&self, y: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * y + c)
    }

    pub fn dp(&self, y: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, c)| acc * y + k as f64 * c)
    }

    pub fn d2p(&self, y: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(2)
            .rev()
            .fold(0.0, |acc, (k, c)| acc * y + (k * (k - 1)) as f64 * c)
    }
}

impl Potential for PolynomialPotential {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|&y| self.p(y)).sum()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        for (o, &y) in out.iter_mut().zip(x) {
            *o = self.dp(y);
        }
    }

    fn laplacian(&self, x: &[f64]) -> f64 {
        x.iter().map(|&y| self.d2p(y)).sum()
    }

    fn hessian_norm(&self, x: &[f64]) -> f64 {
        // Diagonal Hessian.
        x.iter().fold(0.0_f64, |m, &y| m.max(self.d2p(y).abs()))
    }
}

/// `V(x) = x²/√(1+x²)`, the confining potential of the ℝ×𝕋 example.
pub fn rtorus_v(x: f64) -> f64 {
    x * x / (1.0 + x * x).sqrt()
}

/// `V′(x) = x(x²+2)/(1+x²)^{3/2}`.
pub fn vprime(x: f64) -> f64 {
    let s = 1.0 + x * x;
    x * (x * x + 2.0) / (s * s.sqrt())
}

/// `V″(x) = (2−x²)/(1+x²)^{5/2}`.
pub fn vsecond(x: f64) -> f64 {
    let s = 1.0 + x * x;
    (2.0 - x * x) / (s * s * s.sqrt())
}

/// `‖V′‖∞ = 4√6/9`.
pub const VPRIME_SUP: f64 = 1.088_662_107_903_634_7;

/// `V′` attains its supremum at `±√2`, where `V″` vanishes.
pub const VPRIME_ARGMAX: f64 = std::f64::consts::SQRT_2;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sup_constant_is_closed_form() {
        assert!((VPRIME_SUP - 4.0 * 6.0_f64.sqrt() / 9.0).abs() < 1e-16);
        assert!((vprime(VPRIME_ARGMAX) - VPRIME_SUP).abs() < 1e-15);
        assert!(vsecond(VPRIME_ARGMAX).abs() < 1e-15);
    }

    #[test]
    fn polynomial_derivatives() {
        let p = PolynomialPotential::new(1, vec![1.0, -2.0, 0.0, 0.5, 0.25]).unwrap();
        let y = 0.7;
        assert!((p.p(y) - (1.0 - 1.4 + 0.5 * 0.343 + 0.25 * 0.2401)).abs() < 1e-14);
        assert!((p.dp(y) - (-2.0 + 1.5 * 0.49 + 0.343)).abs() < 1e-14);
        assert!((p.d2p(y) - (3.0 * 0.7 + 3.0 * 0.49)).abs() < 1e-14);
        assert!(p.is_confining());
        assert!(!PolynomialPotential::new(1, vec![3.0]).unwrap().is_confining());
    }

    #[test]
    fn trailing_zeros_trimmed() {
        let p = PolynomialPotential::new(2, vec![0.0, 0.0, 0.5, 0.0, 0.0]).unwrap();
        assert_eq!(p.degree(), 2);
        assert_eq!(p, PolynomialPotential::quadratic(2));
    }
}
