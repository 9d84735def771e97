use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::ControlFlow;

use super::clopper_pearson;
use crate::linalg::CompensatedSum;
use crate::processes::{run_path, steps_for, InitialSampler, Observable, ProcessSpec};
use crate::rng::stream;
use crate::{Error, Result};

/// Frequency of `{(1/t)∫₀ᵗ V − μV ≥ r}` with an exact upper confidence limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub r: f64,
    pub successes: u64,
    pub trials: u64,
    pub point: f64,
    pub ci_upper: f64,
    pub level: f64,
}

/// A batch of paths of length `t` for one observable.
#[derive(Debug, Clone)]
pub struct TailExperiment<'a> {
    pub spec: &'a ProcessSpec,
    pub sampler: &'a InitialSampler,
    pub observable: &'a Observable,
    pub t: f64,
    pub dt: f64,
    pub n_traj: usize,
    pub seed: u64,
}

/// `(1/t)∫₀ᵗ V(X_s)ds` for each trajectory, in index order.
pub fn time_averages(exp: &TailExperiment<'_>) -> Result<Vec<f64>> {
    if exp.n_traj == 0 {
        return Err(Error::usage("n_traj must be positive"));
    }
    let n = steps_for(exp.t, exp.dt)?;
    (0..exp.n_traj as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(exp.seed, i);
            let mut state = vec![0.0; exp.spec.state_dim()];
            exp.sampler.draw(&mut rng, &mut state);
            let mut sum = CompensatedSum::new();
            run_path(exp.spec, &mut state, n, exp.dt, &mut rng, |k, s| {
                if k < n {
                    sum.add(exp.observable.eval(s));
                }
                ControlFlow::Continue(())
            })?;
            Ok(exp.dt * sum.value() / exp.t)
        })
        .collect()
}

pub fn tail_from_averages(averages: &[f64], mean: f64, r: f64, level: f64) -> Result<TailEstimate> {
    if averages.is_empty() {
        return Err(Error::usage("no trajectories"));
    }
    let successes = averages.iter().filter(|&&a| a - mean >= r).count() as u64;
    let trials = averages.len() as u64;
    Ok(TailEstimate {
        r,
        successes,
        trials,
        point: successes as f64 / trials as f64,
        ci_upper: clopper_pearson::upper_bound(successes, trials, level),
        level,
    })
}

/// Tail estimates for several thresholds from one batch of paths.
pub fn tail_probabilities(exp: &TailExperiment<'_>, mean: f64, rs: &[f64], level: f64) -> Result<Vec<TailEstimate>> {
    let averages = time_averages(exp)?;
    rs.iter()
        .map(|&r| tail_from_averages(&averages, mean, r, level))
        .collect()
}

pub fn tail_probability(exp: &TailExperiment<'_>, mean: f64, r: f64, level: f64) -> Result<TailEstimate> {
    Ok(tail_probabilities(exp, mean, &[r], level)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::{Initial, ProcessSpec};

    #[test]
    fn impossible_and_certain_events() {
        let spec = ProcessSpec::rtorus();
        let sampler = InitialSampler::new(&spec, &Initial::Invariant).unwrap();
        let v = Observable::Cos { coord: 1 };
        let exp = TailExperiment {
            spec: &spec,
            sampler: &sampler,
            observable: &v,
            t: 1.0,
            dt: 0.01,
            n_traj: 200,
            seed: 4,
        };
        let est = tail_probabilities(&exp, 0.0, &[1.0 + 1e-9, -2.0], 0.999).unwrap();
        assert_eq!(est[0].successes, 0);
        assert_eq!(est[0].point, 0.0);
        assert_eq!(est[1].point, 1.0);
        assert_eq!(est[1].ci_upper, 1.0);
    }

    #[test]
    fn zero_trajectories_rejected() {
        let spec = ProcessSpec::rtorus();
        let sampler = InitialSampler::new(&spec, &Initial::Invariant).unwrap();
        let v = Observable::Cos { coord: 1 };
        let exp = TailExperiment {
            spec: &spec,
            sampler: &sampler,
            observable: &v,
            t: 1.0,
            dt: 0.01,
            n_traj: 0,
            seed: 4,
        };
        assert!(matches!(time_averages(&exp), Err(Error::Usage(_))));
    }
}
