use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::certificate::{dissipation, RhoEstimate};
use super::dms::{random_mean_zero, DmsOperators};
use super::grid::GridOperator;
use crate::bounds::decay_envelope;
use crate::linalg::{max_abs, CsrMatrix};
use crate::{Error, Result};

/// Substep size target `‖hL‖₁ ≤ THETA`.
const THETA: f64 = 2.0;
const MAX_TERMS: usize = 80;

/// `e^{tL} f` by a truncated Taylor series on `s = ⌈t‖L‖₁/θ⌉` substeps.
///
/// Each substep sums terms until they stop changing the partial sum in
/// double precision.
pub fn expm_action(l: &CsrMatrix, t: f64, f: &[f64]) -> Vec<f64> {
    assert!(t >= 0.0, "negative time");
    if t == 0.0 {
        return f.to_vec();
    }
    let s = ((t * l.norm_one()) / THETA).ceil().max(1.0) as usize;
    let h = t / s as f64;
    let mut v = f.to_vec();
    let mut term = vec![0.0; f.len()];
    let mut next = vec![0.0; f.len()];
    for _ in 0..s {
        term.copy_from_slice(&v);
        let mut acc = v.clone();
        for k in 1..=MAX_TERMS {
            l.mul_vec_into(&term, &mut next);
            let c = h / k as f64;
            for (tn, nx) in term.iter_mut().zip(&next) {
                *tn = c * nx;
            }
            for (a, tn) in acc.iter_mut().zip(&term) {
                *a += tn;
            }
            if max_abs(&term) <= f64::EPSILON * 0.5 * max_abs(&acc) {
                break;
            }
        }
        v = acc;
    }
    v
}

/// Worst case over the random vectors at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub t: f64,
    /// `max ‖e^{tL}f‖ / (√3 e^{−2ρt/3}‖f‖)`; passes when `≤ 1 + 1e−8`.
    pub envelope_ratio: f64,
    /// `max ‖e^{tL}f‖_B / (e^{−2ρt/3}‖f‖_B)`.
    pub b_norm_ratio: f64,
    /// `max (⟨f_t, (L + SL) f_t⟩ + ρ‖f_t‖²) / ‖f_t‖²`; passes when `≤ 1e−8·ρ`.
    pub dissipation_excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub rho: f64,
    pub n_random: usize,
    pub points: Vec<DecayPoint>,
    pub passed: bool,
    /// `(vector index, t)` of the first violation.
    pub witness: Option<(usize, f64)>,
}

pub const DECAY_REL_TOL: f64 = 1e-8;

/// Checks the envelope `‖e^{tL}f‖ ≤ √3 e^{−2ρt/3}‖f‖` and the modified-norm
/// dissipation on the given mean-zero vectors.
pub fn decay_check_vectors(
    g: &GridOperator,
    d: &DmsOperators,
    r: &RhoEstimate,
    t_list: &[f64],
    fs: &[Vec<f64>],
) -> Result<DecayReport> {
    if !(r.rho > 0.0) {
        return Err(Error::domain(format!("ρ must be certified positive, got {}", r.rho)));
    }
    for (i, f) in fs.iter().enumerate() {
        let n = g.norm(f);
        if !(n > 0.0) || g.mean(f).abs() > 1e-12 * n {
            return Err(Error::domain(format!(
                "vector {i} is not mean-zero (μf = {:.3e})",
                g.mean(f)
            )));
        }
    }
    let mut times: Vec<f64> = t_list.to_vec();
    times.sort_by(f64::total_cmp);
    if times.first().is_some_and(|t| *t < 0.0) {
        return Err(Error::domain("times must be nonnegative"));
    }
    let rho = r.rho;
    // For each vector, (t, envelope ratio, B ratio, dissipation excess).
    let rows: Vec<Vec<(f64, f64, f64, f64)>> = fs
        .par_iter()
        .map(|f| {
            let n0 = g.norm(f);
            let b0 = d.b_norm_sq(f).sqrt();
            let mut ft = f.clone();
            let mut now = 0.0;
            times
                .iter()
                .map(|&t| {
                    ft = expm_action(g.generator(), t - now, &ft);
                    now = t;
                    let nt = g.norm(&ft);
                    let bt = d.b_norm_sq(&ft).sqrt();
                    let env = nt / (decay_envelope(t, rho).unwrap_or(f64::NAN) * n0);
                    let bratio = bt / ((-2.0 * rho * t / 3.0).exp() * b0);
                    let excess = (dissipation(g, Some(d), &ft) + rho * nt * nt) / (nt * nt);
                    (t, env, bratio, excess)
                })
                .collect()
        })
        .collect();
    let mut points = Vec::with_capacity(times.len());
    let mut witness = None;
    for (k, &t) in times.iter().enumerate() {
        let mut p = DecayPoint {
            t,
            envelope_ratio: 0.0,
            b_norm_ratio: 0.0,
            dissipation_excess: f64::NEG_INFINITY,
        };
        for (i, row) in rows.iter().enumerate() {
            let (_, env, b, ex) = row[k];
            p.envelope_ratio = p.envelope_ratio.max(env);
            p.b_norm_ratio = p.b_norm_ratio.max(b);
            p.dissipation_excess = p.dissipation_excess.max(ex);
            let bad = env > 1.0 + DECAY_REL_TOL || b > 1.0 + DECAY_REL_TOL || ex > DECAY_REL_TOL * rho;
            if bad && witness.is_none() {
                witness = Some((i, t));
            }
        }
        points.push(p);
    }
    Ok(DecayReport {
        rho,
        n_random: fs.len(),
        points,
        passed: witness.is_none(),
        witness,
    })
}

/// [`decay_check_vectors`] on `n_random` seeded Gaussian mean-zero vectors.
pub fn decay_check(
    g: &GridOperator,
    d: &DmsOperators,
    r: &RhoEstimate,
    t_list: &[f64],
    n_random: usize,
    seed: u64,
) -> Result<DecayReport> {
    let fs: Vec<Vec<f64>> = (0..n_random as u64).map(|i| random_mean_zero(g, seed, i)).collect();
    decay_check_vectors(g, d, r, t_list, &fs)
}
