//! Independent reference implementations used only by tests.
//!
//! Nothing here shares code with the production formulas: real arithmetic
//! is fixed-point over `BigInt` with [`PRECISION_BITS`] fractional bits,
//! maximization is golden-section search, binomial probabilities are summed
//! term by term.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::ops::{Add, Div, Mul, Neg, Sub};

pub const PRECISION_BITS: u32 = 400;

/// Fixed-point real: the stored integer is `value · 2^PRECISION_BITS`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Fx(BigInt);

fn one_raw() -> BigInt {
    BigInt::one() << PRECISION_BITS
}

impl Fx {
    pub fn from_f64(x: f64) -> Fx {
        let q = BigRational::from_float(x).expect("finite input");
        Fx::from_rational(&q)
    }

    pub fn from_rational(q: &BigRational) -> Fx {
        Fx((q.numer() << PRECISION_BITS) / q.denom())
    }

    pub fn int(n: i64) -> Fx {
        Fx(BigInt::from(n) << PRECISION_BITS)
    }

    pub fn to_f64(&self) -> f64 {
        BigRational::new(self.0.clone(), one_raw())
            .to_f64()
            .expect("representable")
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn sqrt(&self) -> Fx {
        assert!(!self.0.is_negative(), "sqrt of negative");
        Fx((&self.0 << PRECISION_BITS).sqrt())
    }

    /// `e^x` by halving the argument below 2⁻³², Taylor, then repeated squaring.
    pub fn exp(&self) -> Fx {
        if self.0.is_negative() {
            return &Fx::int(1) / &(-self.clone()).exp();
        }
        let mut halvings = 0u32;
        let threshold = one_raw() >> 32;
        let mut r = self.0.clone();
        while r > threshold {
            r >>= 1;
            halvings += 1;
        }
        let r = Fx(r);
        let mut term = Fx::int(1);
        let mut sum = Fx::int(1);
        let mut k = 1i64;
        loop {
            term = &(&term * &r) / &Fx::int(k);
            if term.is_zero() {
                break;
            }
            sum = &sum + &term;
            k += 1;
        }
        for _ in 0..halvings {
            sum = &sum * &sum;
        }
        sum
    }
}

impl Add for &Fx {
    type Output = Fx;
    fn add(self, o: &Fx) -> Fx {
        Fx(&self.0 + &o.0)
    }
}

impl Sub for &Fx {
    type Output = Fx;
    fn sub(self, o: &Fx) -> Fx {
        Fx(&self.0 - &o.0)
    }
}

impl Mul for &Fx {
    type Output = Fx;
    fn mul(self, o: &Fx) -> Fx {
        Fx((&self.0 * &o.0) >> PRECISION_BITS)
    }
}

impl Div for &Fx {
    type Output = Fx;
    fn div(self, o: &Fx) -> Fx {
        Fx((&self.0 << PRECISION_BITS) / &o.0)
    }
}

impl Neg for Fx {
    type Output = Fx;
    fn neg(self) -> Fx {
        Fx(-self.0)
    }
}

fn c(n: i64) -> Fx {
    Fx::int(n)
}

fn f(x: f64) -> Fx {
    Fx::from_f64(x)
}

fn h_rate_fx(r: f64, rho: f64, v_l2: f64, v_inf: f64) -> Fx {
    let (r, rho, l2, inf) = (f(r), f(rho), f(v_l2), f(v_inf));
    let num = &(&rho * &r) * &r;
    let den = &(&(&c(25) * &l2) * &l2) + &(&(&c(6) * &inf) * &r);
    &num / &den
}

pub fn h_rate(r: f64, rho: f64, v_l2: f64, v_inf: f64) -> f64 {
    h_rate_fx(r, rho, v_l2, v_inf).to_f64()
}

pub fn lambda_upper(rho: f64, v_l2: f64, v_inf: f64) -> Option<f64> {
    let (rho, l2, inf) = (f(rho), f(v_l2), f(v_inf));
    let gap = &(&c(4) * &rho) - &(&c(6) * &inf);
    if gap.is_negative() || gap.is_zero() {
        return None;
    }
    Some((&(&(&c(25) * &l2) * &l2) / &gap).to_f64())
}

pub fn legendre_rate(r: f64, lambda0: f64, beta: f64) -> f64 {
    // λ* = λ₀(1 − √(β/(β+r))) is the stationary point; evaluate the objective there.
    let (r, l0, b) = (f(r), f(lambda0), f(beta));
    let ratio = (&b / &(&b + &r)).sqrt();
    let lam = &l0 * &(&c(1) - &ratio);
    let quad = &(&(&b * &lam) * &lam) / &(&l0 - &lam);
    (&(&lam * &r) - &quad).to_f64()
}

pub fn deviation_bound(t: f64, r: f64, rho: f64, v_l2: f64, v_inf: f64, density_norm: f64) -> f64 {
    let h = h_rate_fx(r, rho, v_l2, v_inf);
    let e = (-(&f(t) * &h)).exp();
    (&(&c(2).sqrt() * &f(density_norm)) * &e).to_f64()
}

pub fn hitting_bound(theta: f64, mu_u: f64, rho: f64, density_norm: f64) -> f64 {
    let (th, mu, rho) = (f(theta), f(mu_u), f(rho));
    let h = &(&rho * &mu) / &c(31);
    let frac = &th / &(&h - &th);
    (&c(1) + &(&(&c(2).sqrt() * &f(density_norm)) * &frac)).to_f64()
}

pub fn decay_envelope(t: f64, rho: f64) -> f64 {
    let exponent = -(&(&(&c(2) * &f(rho)) * &f(t)) / &c(3));
    (&c(3).sqrt() * &exponent.exp()).to_f64()
}

/// Maximum of a unimodal function on `[a, b]` by golden-section search.
pub fn golden_section_max(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut g1, mut g2) = (g(x1), g(x2));
    while (b - a).abs() > tol {
        if g1 < g2 {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + inv_phi * (b - a);
            g2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - inv_phi * (b - a);
            g1 = g(x1);
        }
    }
    let x = 0.5 * (a + b);
    (x, g(x))
}

/// `P(X ≤ k)` for `X ~ Binomial(n, p)`, summed term by term in exact rationals.
pub fn binomial_cdf(k: u64, n: u64, p: f64) -> f64 {
    let p = BigRational::from_float(p).expect("finite p");
    let q = BigRational::one() - &p;
    let mut total = BigRational::zero();
    let mut binom = BigInt::one();
    for j in 0..=k.min(n) {
        if j > 0 {
            binom = binom * BigInt::from(n - j + 1) / BigInt::from(j);
        }
        let term = BigRational::from_integer(binom.clone())
            * num_traits::pow(p.clone(), j as usize)
            * num_traits::pow(q.clone(), (n - j) as usize);
        total += term;
    }
    total.to_f64().expect("representable")
}

/// Maximum of `g` over a dense grid, refined by golden section.
pub fn maximize_on_grid(g: impl Fn(f64) -> f64 + Copy, a: f64, b: f64, points: usize) -> (f64, f64) {
    let step = (b - a) / points as f64;
    let (mut best_x, mut best) = (a, g(a));
    for i in 1..=points {
        let x = a + step * i as f64;
        let v = g(x);
        if v > best {
            best = v;
            best_x = x;
        }
    }
    golden_section_max(g, (best_x - step).max(a), (best_x + step).min(b), 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_and_sqrt_agree_with_libm() {
        for x in [-30.0, -1.0, -1e-6, 0.0, 0.3, 1.0, 7.5] {
            let got = Fx::from_f64(x).exp().to_f64();
            assert!((got - f64::exp(x)).abs() <= 2e-16 * got, "{x}");
        }
        assert!((Fx::int(2).sqrt().to_f64() - std::f64::consts::SQRT_2).abs() < 1e-16);
    }

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let (x, v) = golden_section_max(|x| -(x - 0.3) * (x - 0.3) + 2.0, -1.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6 && (v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn binomial_cdf_small_cases() {
        assert!((binomial_cdf(0, 3, 0.5) - 0.125).abs() < 1e-16);
        assert!((binomial_cdf(3, 3, 0.2) - 1.0).abs() < 1e-16);
        assert!((binomial_cdf(1, 2, 0.3) - 0.91).abs() < 1e-15);
    }
}
