use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::ControlFlow;

use super::Region;
use crate::linalg::CompensatedSum;
use crate::processes::{rtorus_v, run_path, Initial, InitialSampler, InvariantMeasure, ProcessKind, ProcessSpec};
use crate::rng::stream;
use crate::{Error, Result};

/// First grid time in `U`, or `None` when censored at `t_cap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HittingSample {
    pub hit_time: Option<f64>,
    pub t_cap: f64,
}

impl HittingSample {
    pub fn is_censored(&self) -> bool {
        self.hit_time.is_none()
    }

    /// Hitting time with censored paths counted at `t_cap`.
    pub fn surrogate(&self) -> f64 {
        self.hit_time.unwrap_or(self.t_cap)
    }
}

/// Sample mean of `e^{θT}`; censored paths enter as `e^{θ t_cap}`, which
/// biases the mean downward whenever `censored_fraction > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpMomentEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub censored_fraction: f64,
    pub theta: f64,
    pub downward_biased: bool,
}

fn cap_steps(t_cap: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && t_cap > 0.0 && t_cap.is_finite()) {
        return Err(Error::usage(format!(
            "need dt > 0 and finite t_cap > 0; got dt = {dt}, t_cap = {t_cap}"
        )));
    }
    Ok((t_cap / dt - 1e-9).ceil().max(1.0) as usize)
}

fn first_entrance(
    spec: &ProcessSpec,
    region: &Region,
    sampler: &InitialSampler,
    n_steps: usize,
    dt: f64,
    seed: u64,
    index: u64,
) -> Result<HittingSample> {
    let mut rng = stream(seed, index);
    let mut state = vec![0.0; spec.state_dim()];
    sampler.draw(&mut rng, &mut state);
    let hit = run_path(spec, &mut state, n_steps, dt, &mut rng, |_, s| {
        if region.contains(s) {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    Ok(HittingSample {
        hit_time: hit.map(|k| k as f64 * dt),
        t_cap: n_steps as f64 * dt,
    })
}

/// First entrance times on the time grid, censored at `t_cap` (rounded up
/// to a whole number of steps).
#[allow(clippy::too_many_arguments)]
pub fn hitting_times(
    spec: &ProcessSpec,
    region: &Region,
    mu: &InvariantMeasure,
    initial: &Initial,
    n_traj: usize,
    t_cap: f64,
    dt: f64,
    seed: u64,
) -> Result<Vec<HittingSample>> {
    if n_traj == 0 {
        return Err(Error::usage("n_traj must be positive"));
    }
    if !(region.measure(mu) > 0.0) {
        return Err(Error::domain("target set has μ(U) = 0"));
    }
    let n = cap_steps(t_cap, dt)?;
    let sampler = InitialSampler::with_measure(spec, initial, mu)?;
    (0..n_traj as u64)
        .into_par_iter()
        .map(|i| first_entrance(spec, region, &sampler, n, dt, seed, i))
        .collect()
}

pub fn exp_moment(samples: &[HittingSample], theta: f64) -> Result<ExpMomentEstimate> {
    if samples.is_empty() {
        return Err(Error::usage("empty sample set"));
    }
    if !(theta > 0.0) {
        return Err(Error::domain(format!("theta must be positive, got {theta}")));
    }
    let n = samples.len() as f64;
    let values: Vec<f64> = samples.iter().map(|s| (theta * s.surrogate()).exp()).collect();
    let mean = values.iter().copied().collect::<CompensatedSum>().value() / n;
    let var = if samples.len() > 1 {
        values
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .collect::<CompensatedSum>()
            .value()
            / (n - 1.0)
    } else {
        0.0
    };
    let censored = samples.iter().filter(|s| s.is_censored()).count() as f64 / n;
    Ok(ExpMomentEstimate {
        mean,
        std_error: (var / n).sqrt(),
        censored_fraction: censored,
        theta,
        downward_biased: censored > 0.0,
    })
}

/// The comparison with a bound is valid when the censored mass, weighted by
/// `e^{θ t_cap}`, is at most 1% of the bound.
pub fn censoring_gate(est: &ExpMomentEstimate, t_cap: f64, bound: f64) -> bool {
    est.censored_fraction * (est.theta * t_cap).exp() <= 0.01 * bound
}

/// `Ŵ(x) = E_{(x,u)} e^{θT_U}` with `u` uniform, at one probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthPoint {
    pub x: f64,
    pub w_hat: f64,
    pub std_error: f64,
    pub censored_fraction: f64,
    /// `Ŵ(x) / e^{V(x)/2}`.
    pub ratio: f64,
}

/// Pointwise exponential moments for the ℝ×𝕋 example. Probe `p` uses
/// streams `(seed, p·2³² + i)`.
#[allow(clippy::too_many_arguments)]
pub fn growth_profile(
    spec: &ProcessSpec,
    region: &Region,
    mu: &InvariantMeasure,
    theta: f64,
    x_points: &[f64],
    n_traj: usize,
    t_cap: f64,
    dt: f64,
    seed: u64,
) -> Result<Vec<GrowthPoint>> {
    if !matches!(spec.kind(), ProcessKind::RTorus) {
        return Err(Error::usage("growth profile is defined for the ℝ×𝕋 example"));
    }
    if n_traj == 0 {
        return Err(Error::usage("n_traj must be positive"));
    }
    if !(region.measure(mu) > 0.0) {
        return Err(Error::domain("target set has μ(U) = 0"));
    }
    let n = cap_steps(t_cap, dt)?;
    x_points
        .iter()
        .enumerate()
        .map(|(p, &x)| {
            let sampler = InitialSampler::with_measure(spec, &Initial::Conditioned { coord: 0, value: x }, mu)?;
            let base = (p as u64) << 32;
            let samples: Vec<HittingSample> = (0..n_traj as u64)
                .into_par_iter()
                .map(|i| first_entrance(spec, region, &sampler, n, dt, seed, base + i))
                .collect::<Result<_>>()?;
            let est = exp_moment(&samples, theta)?;
            Ok(GrowthPoint {
                x,
                w_hat: est.mean,
                std_error: est.std_error,
                censored_fraction: est.censored_fraction,
                ratio: est.mean / (0.5 * rtorus_v(x)).exp(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (ProcessSpec, InvariantMeasure) {
        let spec = ProcessSpec::rtorus();
        let mu = InvariantMeasure::new(&spec).unwrap();
        (spec, mu)
    }

    #[test]
    fn start_inside_hits_at_zero() {
        let (spec, mu) = setup();
        let u = Region::Band {
            coord: 0,
            lo: -1.0,
            hi: 1.0,
        };
        let s = hitting_times(
            &spec,
            &u,
            &mu,
            &Initial::Point { state: vec![0.5, 2.0] },
            5,
            10.0,
            0.01,
            1,
        )
        .unwrap();
        assert!(s.iter().all(|h| h.hit_time == Some(0.0)));
        let whole = hitting_times(&spec, &Region::Whole, &mu, &Initial::Invariant, 20, 10.0, 0.01, 1).unwrap();
        assert!(whole.iter().all(|h| h.hit_time == Some(0.0)));
        let est = exp_moment(&whole, 0.3).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn exp_moment_monotone_and_censoring_flag() {
        let samples = vec![
            HittingSample {
                hit_time: Some(1.0),
                t_cap: 5.0,
            },
            HittingSample {
                hit_time: Some(2.5),
                t_cap: 5.0,
            },
            HittingSample {
                hit_time: None,
                t_cap: 5.0,
            },
        ];
        let a = exp_moment(&samples, 0.1).unwrap();
        let b = exp_moment(&samples, 0.2).unwrap();
        assert!(b.mean > a.mean);
        assert!(a.downward_biased);
        assert!((a.censored_fraction - 1.0 / 3.0).abs() < 1e-15);
        assert!(exp_moment(&[], 0.1).is_err());
        let tiny = exp_moment(&samples, 1e-12).unwrap();
        assert!((tiny.mean - 1.0).abs() < 1e-10);
    }

    #[test]
    fn null_region_is_rejected() {
        let (spec, mu) = setup();
        let empty = Region::Band {
            coord: 0,
            lo: 100.0,
            hi: 100.0,
        };
        assert!(matches!(
            hitting_times(&spec, &empty, &mu, &Initial::Invariant, 5, 1.0, 0.01, 1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn probe_inside_region_gives_one() {
        let (spec, mu) = setup();
        let u = Region::Band {
            coord: 0,
            lo: -1.0,
            hi: 1.0,
        };
        let g = growth_profile(&spec, &u, &mu, 0.001, &[0.5], 10, 10.0, 0.01, 3).unwrap();
        assert_eq!(g[0].w_hat, 1.0);
    }
}
