//! The three example diffusions, their invariant measures and fixed-step
//! Euler–Maruyama paths.
//!
//! Additive functionals use the left-endpoint rule: after `k` steps the
//! accumulator of `V` holds `dt · Σ_{i<k} V(X_{t_i})`. A constant observable
//! `1` therefore accumulates exactly `k·dt` (up to one rounding of the
//! final product).

mod diagnostics;
mod measure;
mod observables;
mod potential;
mod spec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::io::{self, Write};
use std::ops::ControlFlow;

pub use diagnostics::{ensemble_time_average, ks_critical, ks_uniform, mean_and_se, MomentEstimate};
pub use measure::{GibbsMarginal, InvariantMeasure, Marginal, TABLE_NODES, TAIL_MASS};
pub use observables::Observable;
pub use potential::{rtorus_v, vprime, vsecond, PolynomialPotential, Potential, VPRIME_ARGMAX, VPRIME_SUP};
pub use spec::{wrap_angle, FourierMode, ProcessKind, ProcessSpec, Trig};

use crate::linalg::CompensatedSum;
use crate::rng::{stream, PathRng};
use crate::{Error, Result};

/// Initial law of a path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Initial {
    Point {
        state: Vec<f64>,
    },
    Invariant,
    /// Coordinate `coord` fixed at `value`, the rest drawn from μ.
    Conditioned {
        coord: usize,
        value: f64,
    },
}

/// Draws initial states; holds the invariant measure when it is needed.
#[derive(Debug, Clone)]
pub struct InitialSampler {
    initial: Initial,
    measure: Option<InvariantMeasure>,
    angular: Vec<bool>,
}

impl InitialSampler {
    pub fn new(spec: &ProcessSpec, initial: &Initial) -> Result<Self> {
        let dim = spec.state_dim();
        let measure = match initial {
            Initial::Point { state } => {
                if state.len() != dim {
                    return Err(Error::usage(format!(
                        "initial state has {} components, expected {dim}",
                        state.len()
                    )));
                }
                None
            }
            Initial::Invariant => Some(InvariantMeasure::new(spec)?),
            Initial::Conditioned { coord, .. } => {
                if *coord >= dim {
                    return Err(Error::usage(format!("conditioned coordinate {coord} out of range")));
                }
                Some(InvariantMeasure::new(spec)?)
            }
        };
        Ok(Self {
            initial: initial.clone(),
            measure,
            angular: spec.torus_mask(),
        })
    }

    /// Reuse an already-built measure.
    pub fn with_measure(spec: &ProcessSpec, initial: &Initial, measure: &InvariantMeasure) -> Result<Self> {
        match initial {
            Initial::Point { state } if state.len() != spec.state_dim() => {
                return Err(Error::usage("initial state has the wrong dimension"));
            }
            Initial::Conditioned { coord, .. } if *coord >= spec.state_dim() => {
                return Err(Error::usage(format!("conditioned coordinate {coord} out of range")));
            }
            _ => {}
        }
        Ok(Self {
            initial: initial.clone(),
            measure: Some(measure.clone()),
            angular: spec.torus_mask(),
        })
    }

    pub fn measure(&self) -> Option<&InvariantMeasure> {
        self.measure.as_ref()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match &self.initial {
            Initial::Point { state } => out.copy_from_slice(state),
            Initial::Invariant => self.measure.as_ref().expect("measure built").sample_into(rng, out),
            Initial::Conditioned { coord, value } => {
                self.measure.as_ref().expect("measure built").sample_into(rng, out);
                out[*coord] = *value;
            }
        }
        for (s, &a) in out.iter_mut().zip(&self.angular) {
            if a {
                *s = wrap_angle(*s);
            }
        }
    }
}

/// Number of steps covering `[0, t_end]`; `t_end` must be a multiple of `dt`.
pub fn steps_for(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !(t_end > 0.0) {
        return Err(Error::usage(format!(
            "need dt > 0 and t_end > 0, got dt = {dt}, t_end = {t_end}"
        )));
    }
    if dt > t_end * (1.0 + 1e-12) {
        return Err(Error::usage(format!("dt = {dt} exceeds t_end = {t_end}")));
    }
    let n = (t_end / dt).round();
    if (n * dt - t_end).abs() > 1e-9 * t_end {
        return Err(Error::usage(format!("t_end = {t_end} is not a multiple of dt = {dt}")));
    }
    Ok(n as usize)
}

/// Advance `state` by `n_steps`, calling `visit(k, state)` at `k = 0..=n_steps`
/// before each step. Returns the index at which `visit` broke, if any.
pub fn run_path<R: Rng + ?Sized>(
    spec: &ProcessSpec,
    state: &mut [f64],
    n_steps: usize,
    dt: f64,
    rng: &mut R,
    mut visit: impl FnMut(usize, &[f64]) -> ControlFlow<()>,
) -> Result<Option<usize>> {
    let mut noise = vec![0.0; spec.noise_dim()];
    let mut scratch = vec![0.0; state.len()];
    for k in 0..=n_steps {
        if visit(k, state).is_break() {
            return Ok(Some(k));
        }
        if k == n_steps {
            break;
        }
        for z in noise.iter_mut() {
            *z = StandardNormal.sample(rng);
        }
        spec.step_in_place(state, dt, &noise, &mut scratch)
            .map_err(|e| match e {
                Error::Integration { state, .. } => Error::Integration {
                    time: k as f64 * dt,
                    state,
                },
                other => other,
            })?;
    }
    Ok(None)
}

/// A recorded path with left-endpoint additive functionals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub dt: f64,
    pub seed: u64,
    pub coordinate_names: Vec<String>,
    pub observable_names: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// `accumulators[j][k] ≈ ∫₀^{t_k} V_j(X_s) ds`.
    pub accumulators: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("nonempty trajectory")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("nonempty trajectory")
    }

    pub fn integral(&self, observable: usize) -> f64 {
        *self.accumulators[observable].last().expect("nonempty trajectory")
    }

    pub fn time_average(&self, observable: usize) -> f64 {
        self.integral(observable) / self.final_time()
    }

    /// Header `t, <coordinates>, <observables>`, one row per time point.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain(self.coordinate_names.iter().cloned())
            .chain(self.observable_names.iter().map(|n| format!("int_{n}")))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for k in 0..self.len() {
            let mut row = vec![format!("{}", self.times[k])];
            row.extend(self.states[k].iter().map(|s| format!("{s}")));
            row.extend(self.accumulators.iter().map(|a| format!("{}", a[k])));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Simulate one path on stream `(seed, 0)`.
pub fn simulate(
    spec: &ProcessSpec,
    initial: &Initial,
    t_end: f64,
    dt: f64,
    seed: u64,
    observables: &[Observable],
) -> Result<Trajectory> {
    let sampler = InitialSampler::new(spec, initial)?;
    simulate_with(spec, &sampler, t_end, dt, seed, 0, observables)
}

/// As [`simulate`], on stream `(seed, index)` with a prebuilt sampler.
pub fn simulate_with(
    spec: &ProcessSpec,
    sampler: &InitialSampler,
    t_end: f64,
    dt: f64,
    seed: u64,
    index: u64,
    observables: &[Observable],
) -> Result<Trajectory> {
    let n = steps_for(t_end, dt)?;
    let mut rng: PathRng = stream(seed, index);
    let mut state = vec![0.0; spec.state_dim()];
    sampler.draw(&mut rng, &mut state);
    let mut sums: Vec<CompensatedSum> = vec![CompensatedSum::new(); observables.len()];
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    let mut accumulators: Vec<Vec<f64>> = vec![Vec::with_capacity(n + 1); observables.len()];
    run_path(spec, &mut state, n, dt, &mut rng, |k, s| {
        times.push(k as f64 * dt);
        states.push(s.to_vec());
        for ((sum, acc), obs) in sums.iter_mut().zip(accumulators.iter_mut()).zip(observables) {
            acc.push(dt * sum.value());
            sum.add(obs.eval(s));
        }
        ControlFlow::Continue(())
    })?;
    Ok(Trajectory {
        dt,
        seed,
        coordinate_names: spec.coordinate_names(),
        observable_names: observables.iter().map(Observable::name).collect(),
        times,
        states,
        accumulators,
    })
}

/// One exact draw from μ on stream `(seed, 0)`.
pub fn sample_invariant(spec: &ProcessSpec, seed: u64) -> Result<Vec<f64>> {
    let mu = InvariantMeasure::new(spec)?;
    Ok(mu.sample(&mut stream(seed, 0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_step_path_has_two_states() {
        let spec = ProcessSpec::rtorus();
        let tr = simulate(&spec, &Initial::Point { state: vec![0.0, 1.0] }, 0.01, 0.01, 1, &[]).unwrap();
        assert_eq!(tr.len(), 2);
        assert_eq!(tr.times, vec![0.0, 0.01]);
    }

    #[test]
    fn constant_observable_accumulates_exactly() {
        let spec = ProcessSpec::rtorus();
        let one = Observable::Constant { value: 1.0 };
        let tr = simulate(&spec, &Initial::Invariant, 10.0, 0.01, 3, &[one]).unwrap();
        assert_eq!(tr.integral(0), 10.0);
        assert_eq!(tr.accumulators[0][0], 0.0);
    }

    #[test]
    fn angles_stay_in_range() {
        let spec = ProcessSpec::rtorus();
        let tr = simulate(&spec, &Initial::Point { state: vec![3.0, 6.2] }, 20.0, 0.01, 5, &[]).unwrap();
        assert!(tr.states.iter().all(|s| (0.0..std::f64::consts::TAU).contains(&s[1])));
    }

    #[test]
    fn step_count_validation() {
        assert_eq!(steps_for(10.0, 0.01).unwrap(), 1000);
        assert!(steps_for(0.001, 0.01).is_err());
        assert!(steps_for(1.0, 0.3).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let spec = ProcessSpec::rtorus();
        let one = Observable::Constant { value: 1.0 };
        let tr = simulate(&spec, &Initial::Point { state: vec![0.0, 0.0] }, 0.03, 0.01, 1, &[one]).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "t,x,u,int_const(1)");
        assert_eq!(lines.len(), 5);
    }
}
