//! Statistical checks of the samplers and integrators.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::ControlFlow;

use super::{run_path, steps_for, InitialSampler, ProcessSpec};
use crate::linalg::CompensatedSum;
use crate::rng::stream;
use crate::{Error, Result};

/// Mean over independent paths of a per-path time average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub mean: f64,
    /// Standard error across paths.
    pub std_error: f64,
    pub n_paths: usize,
}

impl MomentEstimate {
    /// `|mean − target| ≤ abs_tol + rel_tol·|target| + 3·se`.
    pub fn within(&self, target: f64, abs_tol: f64, rel_tol: f64) -> bool {
        (self.mean - target).abs() <= abs_tol + rel_tol * target.abs() + 3.0 * self.std_error
    }
}

pub fn mean_and_se(values: &[f64]) -> Result<MomentEstimate> {
    if values.len() < 2 {
        return Err(Error::usage("need at least two values for a standard error"));
    }
    let n = values.len() as f64;
    let mean = values.iter().copied().collect::<CompensatedSum>().value() / n;
    let var = values
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .collect::<CompensatedSum>()
        .value()
        / (n - 1.0);
    Ok(MomentEstimate {
        mean,
        std_error: (var / n).sqrt(),
        n_paths: values.len(),
    })
}

/// `(1/t)∫₀ᵗ f(X_s)ds` (left-endpoint rule) averaged over `n_paths` paths on
/// streams `(seed, i)`.
pub fn ensemble_time_average(
    spec: &ProcessSpec,
    sampler: &InitialSampler,
    f: impl Fn(&[f64]) -> f64 + Sync,
    n_paths: usize,
    t_end: f64,
    dt: f64,
    seed: u64,
) -> Result<MomentEstimate> {
    let n = steps_for(t_end, dt)?;
    let averages: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            let mut state = vec![0.0; spec.state_dim()];
            sampler.draw(&mut rng, &mut state);
            let mut sum = CompensatedSum::new();
            run_path(spec, &mut state, n, dt, &mut rng, |k, s| {
                if k < n {
                    sum.add(f(s));
                }
                ControlFlow::Continue(())
            })?;
            Ok(sum.value() / n as f64)
        })
        .collect::<Result<_>>()?;
    mean_and_se(&averages)
}

/// Kolmogorov–Smirnov statistic `sup |F_n − F|` against the uniform law on
/// `[lo, hi)`.
pub fn ks_uniform(samples: &[f64], lo: f64, hi: f64) -> f64 {
    let mut s: Vec<f64> = samples.iter().map(|&x| (x - lo) / (hi - lo)).collect();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter().enumerate().fold(0.0_f64, |d, (i, &f)| {
        d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    })
}

/// Asymptotic critical value of the KS statistic at level `alpha`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-(0.5 * alpha).ln() / 2.0).sqrt() / (n as f64).sqrt()
}
