//! Grid checks of the structural hypotheses: the Hörmander-type coercivity
//! of the ℝ×𝕋 field family and the three conditions on a Langevin
//! potential. Every report is evidence on the stated grid, not a proof.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::processes::{vprime, Potential, VPRIME_SUP};
use crate::{Error, Result};

type Coeffs = dyn Fn(f64, f64) -> [f64; 2] + Send + Sync;

/// A first-order field `c₀(x,u) ∂ₓ + c₁(x,u) ∂ᵤ` on ℝ×𝕋.
#[derive(Clone)]
pub struct VectorField {
    pub name: String,
    coeffs: Arc<Coeffs>,
}

impl std::fmt::Debug for VectorField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VectorField").field("name", &self.name).finish()
    }
}

impl VectorField {
    pub fn new(name: impl Into<String>, coeffs: impl Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            coeffs: Arc::new(coeffs),
        }
    }

    pub fn at(&self, x: f64, u: f64) -> [f64; 2] {
        (self.coeffs)(x, u)
    }

    /// `Y₁ = ∂ᵤ`
    pub fn y1() -> Self {
        Self::new("Y1", |_, _| [0.0, 1.0])
    }

    /// `Y₀ = cos u ∂ₓ + V′(x) sin u ∂ᵤ`, the drift of `L = Y₀ + Y₁²`.
    pub fn y0() -> Self {
        Self::new("Y0", |x, u| [u.cos(), vprime(x) * u.sin()])
    }

    /// `Z₂ = [Y₁, Y₀] = −sin u ∂ₓ + V′(x) cos u ∂ᵤ`
    pub fn z2() -> Self {
        Self::new("Z2", |x, u| [-u.sin(), vprime(x) * u.cos()])
    }

    /// `Z₃ = [Y₁, Z₂] = −cos u ∂ₓ − V′(x) sin u ∂ᵤ`
    pub fn z3() -> Self {
        Self::new("Z3", |x, u| [-u.cos(), -vprime(x) * u.sin()])
    }
}

/// `[A, B] = (A·∇)B − (B·∇)A` by central differences with step `h`.
pub fn lie_bracket_fd(a: &VectorField, b: &VectorField, x: f64, u: f64, h: f64) -> [f64; 2] {
    let d = |f: &VectorField, dir: [f64; 2]| -> [f64; 2] {
        let p = f.at(x + h * dir[0], u + h * dir[1]);
        let m = f.at(x - h * dir[0], u - h * dir[1]);
        [(p[0] - m[0]) / (2.0 * h), (p[1] - m[1]) / (2.0 * h)]
    };
    let (av, bv) = (a.at(x, u), b.at(x, u));
    let db_along_a = d(b, av);
    let da_along_b = d(a, bv);
    [db_along_a[0] - da_along_b[0], db_along_a[1] - da_along_b[1]]
}

/// Weighted fields `Z_j` with coefficients `a_j`.
#[derive(Debug, Clone)]
pub struct FieldFamily {
    pub fields: Vec<(VectorField, f64)>,
}

impl FieldFamily {
    /// `(Y₁, Z₂, Z₃)` with weights `(‖V′‖∞² + ½, 1, 1)`.
    pub fn rtorus() -> Self {
        Self::rtorus_with(VPRIME_SUP * VPRIME_SUP + 0.5, 1.0, 1.0)
    }

    pub fn rtorus_with(a1: f64, a2: f64, a3: f64) -> Self {
        Self {
            fields: vec![
                (VectorField::y1(), a1),
                (VectorField::z2(), a2),
                (VectorField::z3(), a3),
            ],
        }
    }

    pub fn single(field: VectorField, a: f64) -> Self {
        Self {
            fields: vec![(field, a)],
        }
    }

    /// Smallest eigenvalue of `Σ a_j Z_j Z_jᵀ` at `(x, u)`.
    pub fn min_eigenvalue(&self, x: f64, u: f64) -> f64 {
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for (f, w) in &self.fields {
            let z = f.at(x, u);
            a += w * z[0] * z[0];
            b += w * z[0] * z[1];
            c += w * z[1] * z[1];
        }
        let mid = 0.5 * (a + c);
        let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        mid - rad
    }
}

/// Largest gap between the closed-form `Z₂, Z₃` and finite-difference
/// brackets on `[−x_max, x_max]×𝕋` at `nx × nu` points.
pub fn bracket_consistency(x_max: f64, nx: usize, nu: usize) -> f64 {
    let (y0, y1, z2, z3) = (
        VectorField::y0(),
        VectorField::y1(),
        VectorField::z2(),
        VectorField::z3(),
    );
    let mut worst = 0.0_f64;
    for i in 0..nx {
        let x = -x_max + 2.0 * x_max * i as f64 / (nx - 1).max(1) as f64;
        for j in 0..nu {
            let u = std::f64::consts::TAU * j as f64 / nu as f64;
            for (lhs, rhs) in [
                (lie_bracket_fd(&y1, &y0, x, u, 1e-4), z2.at(x, u)),
                (lie_bracket_fd(&y1, &z2, x, u, 1e-4), z3.at(x, u)),
            ] {
                worst = worst.max((lhs[0] - rhs[0]).abs()).max((lhs[1] - rhs[1]).abs());
            }
        }
    }
    worst
}

pub const HORMANDER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HormanderReport {
    pub alpha_target: f64,
    pub min_eigenvalue: f64,
    pub argmin: [f64; 2],
    /// Largest field coefficient on the grid.
    pub sup_coefficient: f64,
    pub passed: bool,
    pub grid: String,
}

/// Scans `[−x_max, x_max]×𝕋` at `nx × nu` points (endpoints in `x`
/// included, `u = 2πj/nu`) for the smallest eigenvalue of `Σ a_j Z_j Z_jᵀ`.
pub fn hormander_check(
    ff: &FieldFamily,
    x_max: f64,
    nx: usize,
    nu: usize,
    alpha_target: f64,
) -> Result<HormanderReport> {
    if nx == 0 || nu == 0 || !(x_max >= 0.0) {
        return Err(Error::usage("hormander grid must be nonempty"));
    }
    let point = |k: usize| {
        let (i, j) = (k / nu, k % nu);
        let x = if nx == 1 {
            0.0
        } else {
            -x_max + 2.0 * x_max * i as f64 / (nx - 1) as f64
        };
        (x, std::f64::consts::TAU * j as f64 / nu as f64)
    };
    let (min, at, sup) = (0..nx * nu)
        .into_par_iter()
        .map(|k| {
            let (x, u) = point(k);
            let sup = ff
                .fields
                .iter()
                .map(|(f, _)| f.at(x, u))
                .fold(0.0_f64, |m, z| m.max(z[0].abs()).max(z[1].abs()));
            (ff.min_eigenvalue(x, u), k, sup)
        })
        .reduce(
            || (f64::INFINITY, usize::MAX, 0.0),
            |a, b| {
                let (m, k) = if (b.0, b.1) < (a.0, a.1) {
                    (b.0, b.1)
                } else {
                    (a.0, a.1)
                };
                (m, k, a.2.max(b.2))
            },
        );
    let (x, u) = point(at);
    Ok(HormanderReport {
        alpha_target,
        min_eigenvalue: min,
        argmin: [x, u],
        sup_coefficient: sup,
        passed: min >= alpha_target - HORMANDER_TOL,
        grid: format!("verified on grid [−{x_max}, {x_max}]×𝕋 at {nx}×{nu} points"),
    })
}

/// Tensor grid `[−X, X]ᵈ` with `points` per axis, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubeGrid {
    pub half_width: f64,
    pub points: usize,
}

impl CubeGrid {
    const MAX_POINTS: usize = 4_000_000;

    fn nodes(&self, d: usize) -> Result<Vec<Vec<f64>>> {
        let total = (self.points as f64).powi(d as i32);
        if self.points < 2 || total > Self::MAX_POINTS as f64 {
            return Err(Error::usage(format!(
                "grid of {}^{d} points is empty or too large",
                self.points
            )));
        }
        let axis: Vec<f64> = (0..self.points)
            .map(|i| -self.half_width + 2.0 * self.half_width * i as f64 / (self.points - 1) as f64)
            .collect();
        let mut out = vec![Vec::with_capacity(d)];
        for _ in 0..d {
            out = out
                .into_iter()
                .flat_map(|p| axis.iter().map(move |&a| [p.clone(), vec![a]].concat()))
                .collect();
        }
        Ok(out)
    }

    fn doubled(&self) -> Self {
        Self {
            half_width: 2.0 * self.half_width,
            points: 2 * self.points - 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub value: f64,
    pub point: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LangevinReport {
    /// (i) `min (|∇U|² − 2ΔU)` over grid points outside the ball.
    pub confinement: Witness,
    /// (ii) smallest `c₂ ∈ {0, 0.01, …, 0.99}` for which the smallest
    /// admissible `c₁` does not grow when the grid doubles, with that `c₁`.
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c1_witness: Option<Witness>,
    /// (iii) `max |∇²U| / (1 + |∇U|)`, finite when stable under doubling.
    pub c3: Witness,
    pub c3_finite: bool,
    pub passed: bool,
    pub grid: String,
}

struct Sample {
    x: Vec<f64>,
    grad_sq: f64,
    lap: f64,
    hess: f64,
}

fn evaluate(u: &dyn Potential, grid: &CubeGrid) -> Result<Vec<Sample>> {
    grid.nodes(u.dim())?
        .into_par_iter()
        .map(|x| {
            let (grad_sq, lap, hess) = (u.gradient_norm_sq(&x), u.laplacian(&x), u.hessian_norm(&x));
            if !(grad_sq.is_finite() && lap.is_finite() && hess.is_finite()) {
                return Err(Error::domain(format!(
                    "potential evaluator returned a non-finite value at {x:?}"
                )));
            }
            Ok(Sample { x, grad_sq, lap, hess })
        })
        .collect()
}

fn argmax(s: &[Sample], f: impl Fn(&Sample) -> f64) -> (f64, &Sample) {
    s.iter()
        .map(|p| (f(p), p))
        .fold((f64::NEG_INFINITY, &s[0]), |a, b| if b.0 > a.0 { b } else { a })
}

fn stable(small: f64, large: f64) -> bool {
    large <= small + 1e-9 * small.abs().max(1.0)
}

/// Checks the three potential conditions on `grid` and on the grid doubled
/// in extent; growth between the two marks a quantity as unbounded.
pub fn langevin_conditions(u: &dyn Potential, grid: CubeGrid, ball_radius: f64) -> Result<LangevinReport> {
    let small = evaluate(u, &grid)?;
    let large = evaluate(u, &grid.doubled())?;
    let radius = |p: &Sample| p.x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let outside: Vec<&Sample> = small.iter().filter(|p| radius(p) > ball_radius).collect();
    if outside.is_empty() {
        return Err(Error::usage("no grid point lies outside the ball"));
    }
    let conf = outside
        .iter()
        .map(|p| (p.grad_sq - 2.0 * p.lap, *p))
        .fold((f64::INFINITY, outside[0]), |a, b| if b.0 < a.0 { b } else { a });
    let confinement = Witness {
        value: conf.0,
        point: conf.1.x.clone(),
    };

    let mut c1 = None;
    let mut c2 = None;
    let mut c1_witness = None;
    for k in 0..100 {
        let c = k as f64 / 100.0;
        let g = |p: &Sample| p.lap - 0.5 * c * p.grad_sq;
        let (vs, ps) = argmax(&small, g);
        let (vl, _) = argmax(&large, g);
        if stable(vs, vl) {
            c1 = Some(vs);
            c2 = Some(c);
            c1_witness = Some(Witness {
                value: vs,
                point: ps.x.clone(),
            });
            break;
        }
    }
    let h = |p: &Sample| p.hess / (1.0 + p.grad_sq.sqrt());
    let (c3s, p3) = argmax(&small, h);
    let (c3l, _) = argmax(&large, h);
    let c3_finite = stable(c3s, c3l);
    let passed = confinement.value > 0.0 && c2.is_some() && c3_finite;
    Ok(LangevinReport {
        confinement,
        c1,
        c2,
        c1_witness,
        c3: Witness {
            value: c3s,
            point: p3.x.clone(),
        },
        c3_finite,
        passed,
        grid: format!(
            "verified on grid [−{X}, {X}]^{d} with {n} points per axis, growth checked against [−{X2}, {X2}]^{d}",
            X = grid.half_width,
            X2 = 2.0 * grid.half_width,
            d = u.dim(),
            n = grid.points
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::PolynomialPotential;

    #[test]
    fn closed_form_family_has_unit_minimum() {
        let rep = hormander_check(&FieldFamily::rtorus(), 20.0, 101, 64, 0.5).unwrap();
        assert!(rep.passed);
        assert!((rep.min_eigenvalue - 1.0).abs() < 1e-12, "{}", rep.min_eigenvalue);
    }

    #[test]
    fn single_field_is_degenerate() {
        let rep = hormander_check(&FieldFamily::single(VectorField::y1(), 1.0), 5.0, 11, 8, 0.5).unwrap();
        assert!(!rep.passed && rep.min_eigenvalue.abs() < 1e-15);
    }

    #[test]
    fn quadratic_witnesses() {
        let u = PolynomialPotential::quadratic(1);
        let rep = langevin_conditions(
            &u,
            CubeGrid {
                half_width: 10.0,
                points: 401,
            },
            2f64.sqrt() + 1.0,
        )
        .unwrap();
        assert!(rep.passed);
        assert_eq!(rep.c2, Some(0.0));
        assert_eq!(rep.c1, Some(1.0));
        assert!((rep.c3.value - 1.0).abs() < 1e-12);
    }
}
