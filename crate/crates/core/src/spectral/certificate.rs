use serde::{Deserialize, Serialize};

use super::dms::{random_mean_zero, DmsOperators};
use super::eigen::lobpcg_smallest;
use super::grid::{Discretization, GridOperator};
use crate::linalg::norm;
use crate::{Error, Result};

/// Relative residual tolerance of the certificate eigen-solve.
pub const CERTIFICATE_TOL: f64 = 1e-10;
const BLOCK: usize = 4;
const MAX_ITER: usize = 20_000;

/// Certified discrete decay rate.
///
/// `certificate` is the smallest eigenvalue of
/// `H = −½[(L + SL) + (L + SL)*]` on the weighted mean-zero subspace and
/// `rho` equals it; `residual` bounds the distance from `rho` to an exact
/// eigenvalue of `H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoEstimate {
    pub rho: f64,
    pub epsilon_used: f64,
    pub certificate: f64,
    pub residual: f64,
    pub iterations: usize,
    pub nx: usize,
    pub n_fast: usize,
    pub radius: f64,
    pub discretization: Discretization,
}

/// Smallest eigenpair of `H` (with `S = 0` when `dms` is `None`).
#[derive(Debug, Clone)]
pub struct Certificate {
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Minimizing direction in grid coordinates, unit `‖·‖_w`.
    pub eigenvector: Vec<f64>,
    /// The next Ritz values, ascending.
    pub next: Vec<f64>,
}

/// `H f = −½[(L + L*) f + S L f + L* S f]`
pub fn apply_h(g: &GridOperator, dms: Option<&DmsOperators>, f: &[f64]) -> Vec<f64> {
    let lf = g.apply_l(f);
    let lsf = g.apply_l_adjoint(f);
    let mut out: Vec<f64> = lf.iter().zip(&lsf).map(|(a, b)| -0.5 * (a + b)).collect();
    if let Some(d) = dms {
        let slf = d.apply_s(&lf);
        let lssf = g.apply_l_adjoint(&d.apply_s(f));
        for ((o, a), b) in out.iter_mut().zip(&slf).zip(&lssf) {
            *o -= 0.5 * (a + b);
        }
    }
    out
}

/// `⟨f, (L + SL) f⟩_w`
pub fn dissipation(g: &GridOperator, dms: Option<&DmsOperators>, f: &[f64]) -> f64 {
    let lf = g.apply_l(f);
    let mut v = g.inner(f, &lf);
    if let Some(d) = dms {
        v += g.inner(f, &d.apply_s(&lf));
    }
    v
}

fn slow_start(g: &GridOperator, shape: impl Fn(f64) -> f64) -> Vec<f64> {
    let slow: Vec<f64> = g.x_centers().iter().map(|&x| shape(x)).collect();
    g.center(&g.broadcast(&slow))
}

/// Minimizes the Rayleigh quotient of `H` over mean-zero vectors.
///
/// Works with `y = W^{½} f`, deflating `W^{½}·1`, preconditioned by
/// `(|diag L| + 1)⁻¹`.
pub fn certify(g: &GridOperator, dms: Option<&DmsOperators>, seed: u64) -> Certificate {
    let sq: Vec<f64> = g.weights().iter().map(|w| w.sqrt()).collect();
    let mut d: Vec<f64> = sq.iter().zip(g.constant()).map(|(s, c)| s * c).collect();
    let nd = norm(&d);
    d.iter_mut().for_each(|x| *x /= nd);
    let diag: Vec<f64> = (0..g.dim()).map(|r| g.generator().get(r, r).abs()).collect();
    let scale = diag.iter().fold(1.0_f64, |m, x| m.max(*x));
    let r = g.radius;
    let mut init = vec![
        slow_start(g, |x| x / r),
        slow_start(g, |x| (x / r).abs()),
        slow_start(g, |x| (x / r) * (x / r).abs()),
        random_mean_zero(g, seed, 0),
    ];
    init.truncate(BLOCK);
    let init: Vec<Vec<f64>> = init
        .into_iter()
        .map(|f| f.iter().zip(&sq).map(|(a, s)| a * s).collect())
        .collect();
    let out = lobpcg_smallest(
        |y| {
            let f: Vec<f64> = y.iter().zip(&sq).map(|(a, s)| a / s).collect();
            apply_h(g, dms, &f).iter().zip(&sq).map(|(a, s)| a * s).collect()
        },
        |res| res.iter().zip(&diag).map(|(a, b)| a / (b + 1.0)).collect(),
        &[d],
        init,
        CERTIFICATE_TOL * scale,
        MAX_ITER,
    );
    let eigenvector = out.vectors[0].iter().zip(&sq).map(|(a, s)| a / s).collect();
    Certificate {
        value: out.values[0],
        residual: out.residuals[0],
        iterations: out.iterations,
        converged: out.converged,
        eigenvector,
        next: out.values[1..].to_vec(),
    }
}

/// Certified `ρ` for the given DMS operators; fails with the offending
/// eigenvector when the certificate is not positive.
pub fn estimate_rho(g: &GridOperator, dms: &DmsOperators) -> Result<RhoEstimate> {
    let c = certify(g, Some(dms), 0x0c3e7);
    if !c.converged {
        return Err(Error::solver(format!(
            "certificate eigen-solve did not converge: residual {:.3e} after {} iterations",
            c.residual, c.iterations
        )));
    }
    if !(c.value > 0.0) {
        return Err(Error::Certificate {
            value: c.value,
            eigenvector: c.eigenvector,
        });
    }
    Ok(RhoEstimate {
        rho: c.value,
        epsilon_used: dms.epsilon(),
        certificate: c.value,
        residual: c.residual,
        iterations: c.iterations,
        nx: g.nx(),
        n_fast: g.n_fast(),
        radius: g.radius,
        discretization: g.discretization(),
    })
}

/// The certificate with `S = 0`: the gap of the symmetric part of `−L`.
pub fn negative_control(g: &GridOperator) -> Certificate {
    certify(g, None, 0x0c3e7)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonScanPoint {
    pub epsilon: f64,
    pub s_norm: f64,
    pub certificate: f64,
}

/// `‖S‖` and the certificate for `ε ∈ {0.1, …, 0.9}`.
pub fn epsilon_scan(g: &GridOperator) -> Result<Vec<EpsilonScanPoint>> {
    (1..=9)
        .map(|k| {
            let eps = k as f64 / 10.0;
            let d = DmsOperators::new(g, eps)?;
            let c = certify(g, Some(&d), 0x0c3e7);
            Ok(EpsilonScanPoint {
                epsilon: eps,
                s_norm: d.s_norm(0x0d35),
                certificate: c.value,
            })
        })
        .collect()
}

/// Largest scanned ε with `‖S‖ ≤ ½` and a positive certificate.
pub fn best_epsilon(scan: &[EpsilonScanPoint]) -> Option<&EpsilonScanPoint> {
    scan.iter()
        .rfind(|p| p.s_norm <= super::dms::S_NORM_LIMIT && p.certificate > 0.0)
}
