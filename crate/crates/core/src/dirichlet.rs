//! The exit-time boundary problem `LW + θW = 0` on `U^c`, `W = 1` on `U`.
//!
//! Its solution is `W = E e^{θT_U}`, so it is the PDE counterpart of the
//! exponential hitting-time moments. `C = max_U (LW + θW)` is the constant
//! of the Lyapunov inequality `LW ≤ −θW + C`. Solved on the upwind
//! finite-volume grid, whose generator is an M-matrix, so `−(L + θ)`
//! restricted to `U^c` factors without pivoting exactly when θ lies below the
//! principal eigenvalue of the exit problem.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::linalg::{bicgstab, max_abs, BandedLu, CsrMatrix, TripletBuilder};
use crate::montecarlo::{GrowthPoint, Region};
use crate::processes::rtorus_v;
use crate::spectral::{Discretization, GridKind, GridOperator, Layout};
use crate::{Error, Result};

/// Residual gate for the linear solve, relative to `max W`.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirichletSolution {
    pub nx: usize,
    pub nu: usize,
    pub radius: f64,
    pub theta: f64,
    pub x_centers: Vec<f64>,
    pub u_centers: Vec<f64>,
    /// Cells inside `U`.
    pub u_cells: Vec<usize>,
    /// Layout `i·nu + j`.
    pub w: Vec<f64>,
    /// `max |LW + θW|` over `U^c`.
    pub residual: f64,
    /// `residual / max W`.
    pub relative_residual: f64,
    /// `max (LW + θW)` over `U`.
    pub lyapunov_c: f64,
    pub min_w: f64,
    /// u-slices on which `W` decreases moving away from `U` beyond solver
    /// tolerance, within `|x| ≤ R/2` (the reflecting wall at `|x| = R` bends
    /// `W` down in the outermost cells).
    pub monotonicity_violations: usize,
    pub solver: String,
}

impl DirichletSolution {
    /// Slab averages over `u`, one per `x` center.
    pub fn u_averaged(&self) -> Vec<f64> {
        self.w
            .chunks(self.nu)
            .map(|s| s.iter().sum::<f64>() / self.nu as f64)
            .collect()
    }

    /// u-averaged `W` at `x`, linear between centers, clamped at the ends.
    pub fn at(&self, x: f64) -> f64 {
        let avg = self.u_averaged();
        let xs = &self.x_centers;
        if x <= xs[0] {
            return avg[0];
        }
        if x >= xs[xs.len() - 1] {
            return avg[xs.len() - 1];
        }
        let dx = xs[1] - xs[0];
        let k = (((x - xs[0]) / dx).floor() as usize).min(xs.len() - 2);
        let s = (x - xs[k]) / dx;
        (1.0 - s) * avg[k] + s * avg[k + 1]
    }

    /// `(x, max_x W̄(x)/e^{V(x)/2})` over the grid, and whether the maximizer
    /// lies strictly inside the truncated domain.
    pub fn growth_ratio(&self) -> (f64, f64, bool) {
        let avg = self.u_averaged();
        let (mut best, mut at) = (f64::NEG_INFINITY, 0usize);
        for (i, (&x, &w)) in self.x_centers.iter().zip(&avg).enumerate() {
            let r = w / (0.5 * rtorus_v(x)).exp();
            if r > best {
                best = r;
                at = i;
            }
        }
        (self.x_centers[at], best, at > 0 && at + 1 < self.nx)
    }

    /// `x,u,W` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,u,W")?;
        for (i, &x) in self.x_centers.iter().enumerate() {
            for (j, &u) in self.u_centers.iter().enumerate() {
                writeln!(out, "{x},{u},{:.17e}", self.w[i * self.nu + j])?;
            }
        }
        Ok(())
    }
}

/// `θ` against the admissible rate `h(μ(U))`: a warning when violated.
pub fn theta_warning(theta: f64, admissible: f64) -> Option<String> {
    (theta >= admissible).then(|| format!("θ = {theta} is not below h(μ(U)) = {admissible}; the bound does not apply"))
}

/// Solves `(L + θ)W = 0` on `U^c` with `W = 1` on `U`.
pub fn solve_dirichlet(g: &GridOperator, region: &Region, theta: f64) -> Result<DirichletSolution> {
    let (fast, periodic) = match (g.kind(), g.discretization(), g.layout()) {
        (
            GridKind::RTorus,
            Discretization::FiniteVolume { .. },
            Layout::Nodal {
                fast_centers, periodic, ..
            },
        ) => (fast_centers.clone(), *periodic),
        _ => return Err(Error::usage("the boundary problem needs a finite-volume ℝ×𝕋 grid")),
    };
    debug_assert!(periodic);
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(Error::domain(format!("θ must be finite and nonnegative, got {theta}")));
    }
    let (nx, nu) = (g.nx(), g.n_fast());
    let n = nx * nu;
    let inside: Vec<bool> = (0..n)
        .map(|r| {
            let (i, j) = (r / nu, r % nu);
            region.contains(&[g.x_centers()[i], fast[j]])
        })
        .collect();
    let u_cells: Vec<usize> = (0..n).filter(|&r| inside[r]).collect();
    if u_cells.is_empty() {
        return Err(Error::domain("U contains no grid cell"));
    }

    let l = g.generator();
    let mut b = TripletBuilder::new(n, n);
    let mut rhs = vec![0.0; n];
    for r in 0..n {
        if inside[r] {
            b.push(r, r, 1.0);
            rhs[r] = 1.0;
        } else {
            for (c, v) in l.row(r) {
                b.push(r, c, -v);
            }
            b.push(r, r, -theta);
        }
    }
    let a = b.build();
    let (w, solver) = if theta == 0.0 {
        // L1 = 0, so the constant is the solution.
        (vec![1.0; n], "constant".to_string())
    } else {
        solve_restricted(&a, &rhs, theta)?
    };

    let lw = l.mul_vec(&w);
    let mut residual = 0.0_f64;
    let mut lyapunov_c = f64::NEG_INFINITY;
    for r in 0..n {
        let v = lw[r] + theta * w[r];
        if inside[r] {
            lyapunov_c = lyapunov_c.max(v);
        } else {
            residual = residual.max(v.abs());
        }
    }
    let wmax = max_abs(&w);
    let min_w = w.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = 1e-8 * wmax;
    let half = g.x_domain()[1];
    let mut violations = 0;
    for j in 0..nu {
        let col: Vec<f64> = (0..nx).map(|i| w[i * nu + j]).collect();
        let xs = g.x_centers();
        let bad = (0..nx - 1).any(|i| {
            if xs[i].abs().max(xs[i + 1].abs()) > 0.5 * half {
                return false;
            }
            let outward_right = xs[i] >= 0.0 && !inside[i * nu + j];
            let outward_left = xs[i + 1] <= 0.0 && !inside[(i + 1) * nu + j];
            (outward_right && col[i + 1] < col[i] - tol) || (outward_left && col[i] < col[i + 1] - tol)
        });
        violations += bad as usize;
    }
    Ok(DirichletSolution {
        nx,
        nu,
        radius: g.x_domain()[1],
        theta,
        x_centers: g.x_centers().to_vec(),
        u_centers: fast,
        u_cells,
        w,
        residual,
        relative_residual: residual / wmax.max(1.0),
        lyapunov_c,
        min_w,
        monotonicity_violations: violations,
        solver,
    })
}

fn solve_restricted(a: &CsrMatrix, rhs: &[f64], theta: f64) -> Result<(Vec<f64>, String)> {
    let lu = BandedLu::factor(a).map_err(|e| singular(theta, &e.to_string()))?;
    if !(lu.min_signed_pivot() > 0.0) {
        return Err(singular(theta, &format!("pivot {:.3e}", lu.min_signed_pivot())));
    }
    let mut w = lu.solve(rhs);
    let mut solver = "banded-lu".to_string();
    for _ in 0..2 {
        let ax = a.mul_vec(&w);
        let res: Vec<f64> = rhs.iter().zip(&ax).map(|(b, y)| b - y).collect();
        let corr = lu.solve(&res);
        w.iter_mut().zip(&corr).for_each(|(x, c)| *x += c);
    }
    let rel = |w: &[f64]| {
        let ax = a.mul_vec(w);
        max_abs(&rhs.iter().zip(&ax).map(|(b, y)| b - y).collect::<Vec<_>>()) / max_abs(w).max(1.0)
    };
    if rel(&w) > RESIDUAL_TOL {
        let k = bicgstab(a, rhs, Some(&w), RESIDUAL_TOL, 20_000);
        if !k.converged {
            return Err(Error::solver(format!(
                "boundary problem residual {:.3e} after fallback",
                k.relative_residual
            )));
        }
        w = k.solution;
        solver = "banded-lu+bicgstab".to_string();
    }
    Ok((w, solver))
}

fn singular(theta: f64, detail: &str) -> Error {
    Error::solver(format!(
        "restricted system L + θ on U^c is singular or indefinite at θ = {theta} ({detail}); \
         θ is at or above the principal eigenvalue of the exit problem, use a smaller θ"
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeComparison {
    pub x: f64,
    pub w_coarse: f64,
    pub w_fine: f64,
    /// `2W_fine − W_coarse`.
    pub w_extrapolated: f64,
    /// `|W_fine − W_coarse|`.
    pub delta_disc: f64,
    pub w_mc: f64,
    pub std_error: f64,
    pub censored_fraction: f64,
    /// `|W_extrapolated − Ŵ| ≤ 3·se + δ_disc`.
    pub passed: bool,
    /// `|W_fine − W_coarse| / W_fine`.
    pub refinement_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub theta: f64,
    pub probes: Vec<ProbeComparison>,
    pub passed: bool,
    pub max_refinement_change: f64,
}

/// Compares u-averaged PDE values on two resolutions with Monte Carlo
/// growth-profile estimates at the same probes. The first-order Richardson
/// value `2W_fine − W_coarse` is compared, with `|W_fine − W_coarse|` as the
/// discretization error bar.
pub fn crossvalidate(
    coarse: &DirichletSolution,
    fine: &DirichletSolution,
    mc: &[GrowthPoint],
) -> Result<CrossValidation> {
    if (coarse.theta - fine.theta).abs() > 1e-15 * fine.theta.max(1.0) {
        return Err(Error::usage("coarse and fine solutions use different θ"));
    }
    let probes: Vec<ProbeComparison> = mc
        .iter()
        .map(|p| {
            let (wc, wf) = (coarse.at(p.x), fine.at(p.x));
            let delta = (wf - wc).abs();
            ProbeComparison {
                x: p.x,
                w_coarse: wc,
                w_fine: wf,
                w_extrapolated: 2.0 * wf - wc,
                delta_disc: delta,
                w_mc: p.w_hat,
                std_error: p.std_error,
                censored_fraction: p.censored_fraction,
                passed: (2.0 * wf - wc - p.w_hat).abs() <= 3.0 * p.std_error + delta,
                refinement_change: delta / wf,
            }
        })
        .collect();
    Ok(CrossValidation {
        theta: fine.theta,
        passed: probes.iter().all(|p| p.passed),
        max_refinement_change: probes.iter().map(|p| p.refinement_change).fold(0.0, f64::max),
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_rtorus_generator, Scheme};

    fn grid() -> GridOperator {
        build_rtorus_generator(48, 16, 24.0, Discretization::FiniteVolume { scheme: Scheme::Upwind }).unwrap()
    }

    #[test]
    fn theta_zero_gives_ones() {
        let g = grid();
        let s = solve_dirichlet(
            &g,
            &Region::Band {
                coord: 0,
                lo: -1.0,
                hi: 1.0,
            },
            0.0,
        )
        .unwrap();
        assert!(s.w.iter().all(|&w| w == 1.0));
        let whole = solve_dirichlet(&g, &Region::Whole, 0.3).unwrap();
        assert!(whole.w.iter().all(|&w| w == 1.0));
    }

    #[test]
    fn large_theta_is_rejected() {
        let g = grid();
        let e = solve_dirichlet(
            &g,
            &Region::Band {
                coord: 0,
                lo: -1.0,
                hi: 1.0,
            },
            5.0,
        )
        .unwrap_err();
        assert!(e.to_string().contains("smaller θ"), "{e}");
    }

    #[test]
    fn modal_grid_is_rejected() {
        let g = build_rtorus_generator(32, 16, 24.0, Discretization::Modal).unwrap();
        assert!(matches!(solve_dirichlet(&g, &Region::Whole, 0.1), Err(Error::Usage(_))));
    }
}
