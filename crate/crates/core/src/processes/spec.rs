use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::potential::{vprime, PolynomialPotential, Potential};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trig {
    Cos,
    Sin,
}

/// One term `a_j e_j(x₁)e_j(x₂)` of the interaction potential, with
/// `e_j(x) = cos(k·x)` or `sin(k·x)` on 𝕋ᵈ. Then `Δe_j = −|k|² e_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierMode {
    pub coefficient: f64,
    pub wavevector: Vec<i32>,
    pub trig: Trig,
}

impl FourierMode {
    pub fn new(coefficient: f64, wavevector: Vec<i32>, trig: Trig) -> Self {
        Self {
            coefficient,
            wavevector,
            trig,
        }
    }

    /// `|λ_j| = |k|²`.
    pub fn eigenvalue_abs(&self) -> f64 {
        self.wavevector.iter().map(|&k| (k as f64) * (k as f64)).sum()
    }

    fn phase(&self, x: &[f64]) -> f64 {
        self.wavevector.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self.trig {
            Trig::Cos => self.phase(x).cos(),
            Trig::Sin => self.phase(x).sin(),
        }
    }

    /// `∇e_j(x) = s(x)·k` with `s = −sin` for cosine modes and `cos` for sine modes.
    pub fn gradient_scale(&self, x: &[f64]) -> f64 {
        match self.trig {
            Trig::Cos => -self.phase(x).sin(),
            Trig::Sin => self.phase(x).cos(),
        }
    }

    /// Stationary variance of `U_j`: `1/(a_j|λ_j|)`.
    pub fn stationary_variance(&self) -> f64 {
        1.0 / (self.coefficient * self.eigenvalue_abs())
    }
}

/// The three example diffusions.
///
/// * `KineticLangevin`: state `(x, v) ∈ ℝᵈ×ℝᵈ`,
///   `dx = v dt`, `dv = −(∇U(x) + v) dt + √2 dB`.
/// * `SelfInteracting`: state `(x, u) ∈ 𝕋ᵈ×ℝⁿ`,
///   `dx = dB − Σ a_j ∇e_j(x) u_j dt`, `du_j = e_j(x) dt`.
/// * `RTorus`: state `(x, u) ∈ ℝ×𝕋`, `dx = cos(u) dt`,
///   `du = V′(x) sin(u) dt + √2 dB`, generator `cos(u)∂ₓ + V′(x)sin(u)∂_u + ∂_u²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProcessKind {
    KineticLangevin { potential: PolynomialPotential },
    SelfInteracting { dim: usize, modes: Vec<FourierMode> },
    RTorus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProcessKind", into = "ProcessKind")]
pub struct ProcessSpec {
    kind: ProcessKind,
}

impl TryFrom<ProcessKind> for ProcessSpec {
    type Error = Error;

    fn try_from(kind: ProcessKind) -> Result<Self> {
        match &kind {
            ProcessKind::KineticLangevin { potential } => {
                PolynomialPotential::new(potential.dim, potential.coeffs.clone())?;
            }
            ProcessKind::SelfInteracting { dim, modes } => {
                if *dim == 0 || modes.is_empty() {
                    return Err(Error::config(
                        "self-interacting system needs d ≥ 1 and at least one mode",
                    ));
                }
                for (j, m) in modes.iter().enumerate() {
                    if !(m.coefficient > 0.0 && m.coefficient.is_finite()) {
                        return Err(Error::config(format!("mode {j}: coefficient a_j must be positive")));
                    }
                    if m.wavevector.len() != *dim {
                        return Err(Error::config(format!("mode {j}: wavevector must have length {dim}")));
                    }
                    if m.eigenvalue_abs() == 0.0 {
                        return Err(Error::config(format!("mode {j}: wavevector must be nonzero")));
                    }
                }
            }
            ProcessKind::RTorus => {}
        }
        Ok(Self { kind })
    }
}

impl From<ProcessSpec> for ProcessKind {
    fn from(spec: ProcessSpec) -> Self {
        spec.kind
    }
}

impl ProcessSpec {
    pub fn new(kind: ProcessKind) -> Result<Self> {
        Self::try_from(kind)
    }

    pub fn kinetic_langevin(potential: PolynomialPotential) -> Result<Self> {
        Self::new(ProcessKind::KineticLangevin { potential })
    }

    pub fn self_interacting(dim: usize, modes: Vec<FourierMode>) -> Result<Self> {
        Self::new(ProcessKind::SelfInteracting { dim, modes })
    }

    /// `d = 1`, interaction `a₁cos x₁cos x₂ + a₂sin x₁sin x₂`.
    pub fn basic_self_interacting(a1: f64, a2: f64) -> Result<Self> {
        Self::self_interacting(
            1,
            vec![
                FourierMode::new(a1, vec![1], Trig::Cos),
                FourierMode::new(a2, vec![1], Trig::Sin),
            ],
        )
    }

    pub fn rtorus() -> Self {
        Self {
            kind: ProcessKind::RTorus,
        }
    }

    pub fn kind(&self) -> &ProcessKind {
        &self.kind
    }

    pub fn state_dim(&self) -> usize {
        match &self.kind {
            ProcessKind::KineticLangevin { potential } => 2 * potential.dim,
            ProcessKind::SelfInteracting { dim, modes } => dim + modes.len(),
            ProcessKind::RTorus => 2,
        }
    }

    pub fn noise_dim(&self) -> usize {
        match &self.kind {
            ProcessKind::KineticLangevin { potential } => potential.dim,
            ProcessKind::SelfInteracting { dim, .. } => *dim,
            ProcessKind::RTorus => 1,
        }
    }

    pub fn torus_mask(&self) -> Vec<bool> {
        match &self.kind {
            ProcessKind::KineticLangevin { potential } => vec![false; 2 * potential.dim],
            ProcessKind::SelfInteracting { dim, modes } => {
                let mut m = vec![true; *dim];
                m.extend(std::iter::repeat_n(false, modes.len()));
                m
            }
            ProcessKind::RTorus => vec![false, true],
        }
    }

    pub fn coordinate_names(&self) -> Vec<String> {
        match &self.kind {
            ProcessKind::KineticLangevin { potential } => {
                let d = potential.dim;
                (1..=d)
                    .map(|i| format!("x{i}"))
                    .chain((1..=d).map(|i| format!("v{i}")))
                    .collect()
            }
            ProcessKind::SelfInteracting { dim, modes } => (1..=*dim)
                .map(|i| format!("x{i}"))
                .chain((1..=modes.len()).map(|j| format!("u{j}")))
                .collect(),
            ProcessKind::RTorus => vec!["x".into(), "u".into()],
        }
    }

    /// Drift vector `b(state)`.
    pub fn drift(&self, state: &[f64], out: &mut [f64]) {
        match &self.kind {
            ProcessKind::KineticLangevin { potential } => {
                let d = potential.dim;
                let (x, v) = state.split_at(d);
                let (dx, dv) = out.split_at_mut(d);
                dx.copy_from_slice(v);
                potential.gradient(x, dv);
                for (o, vi) in dv.iter_mut().zip(v) {
                    *o = -*o - vi;
                }
            }
            ProcessKind::SelfInteracting { dim, modes } => {
                let (x, u) = state.split_at(*dim);
                let (dx, du) = out.split_at_mut(*dim);
                dx.iter_mut().for_each(|o| *o = 0.0);
                for ((m, uj), duj) in modes.iter().zip(u).zip(du.iter_mut()) {
                    let s = m.coefficient * m.gradient_scale(x) * uj;
                    for (o, &k) in dx.iter_mut().zip(&m.wavevector) {
                        *o -= s * k as f64;
                    }
                    *duj = m.value(x);
                }
            }
            ProcessKind::RTorus => {
                let (x, u) = (state[0], state[1]);
                out[0] = u.cos();
                out[1] = vprime(x) * u.sin();
            }
        }
    }

    /// Coordinates driven by Brownian motion, with their noise amplitude.
    fn noise_targets(&self) -> (usize, f64) {
        match &self.kind {
            ProcessKind::KineticLangevin { potential } => (potential.dim, std::f64::consts::SQRT_2),
            ProcessKind::SelfInteracting { .. } => (0, 1.0),
            ProcessKind::RTorus => (1, std::f64::consts::SQRT_2),
        }
    }

    /// One Euler–Maruyama step in place. `noise` holds standard Gaussians.
    pub fn step_in_place(&self, state: &mut [f64], dt: f64, noise: &[f64], scratch: &mut [f64]) -> Result<()> {
        debug_assert_eq!(noise.len(), self.noise_dim());
        self.drift(state, scratch);
        if scratch.iter().any(|b| !b.is_finite()) {
            return Err(Error::Integration {
                time: f64::NAN,
                state: state.to_vec(),
            });
        }
        for (s, b) in state.iter_mut().zip(scratch.iter()) {
            *s += b * dt;
        }
        let (offset, amplitude) = self.noise_targets();
        let scale = amplitude * dt.sqrt();
        for (s, z) in state[offset..offset + noise.len()].iter_mut().zip(noise) {
            *s += scale * z;
        }
        match &self.kind {
            ProcessKind::KineticLangevin { .. } => {}
            ProcessKind::SelfInteracting { dim, .. } => state[..*dim].iter_mut().for_each(|s| *s = wrap_angle(*s)),
            ProcessKind::RTorus => state[1] = wrap_angle(state[1]),
        }
        if state.iter().any(|s| !s.is_finite()) {
            return Err(Error::Integration {
                time: f64::NAN,
                state: state.to_vec(),
            });
        }
        Ok(())
    }

    pub fn step(&self, state: &[f64], dt: f64, noise: &[f64]) -> Result<Vec<f64>> {
        if state.len() != self.state_dim() {
            return Err(Error::usage(format!(
                "state has {} components, expected {}",
                state.len(),
                self.state_dim()
            )));
        }
        if noise.len() != self.noise_dim() {
            return Err(Error::usage(format!(
                "noise has {} components, expected {}",
                noise.len(),
                self.noise_dim()
            )));
        }
        if !(dt > 0.0) {
            return Err(Error::usage(format!("dt must be positive, got {dt}")));
        }
        let mut next = state.to_vec();
        let mut scratch = vec![0.0; state.len()];
        self.step_in_place(&mut next, dt, noise, &mut scratch)?;
        Ok(next)
    }
}

/// Reduce an angle to `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn rtorus_x_increment_vanishes_at_quarter_turn() {
        let spec = ProcessSpec::rtorus();
        let next = spec.step(&[0.3, FRAC_PI_2], 0.01, &[0.0]).unwrap();
        assert!((next[0] - 0.3).abs() < 1e-17);
    }

    #[test]
    fn langevin_origin_is_fixed_without_noise() {
        let spec = ProcessSpec::kinetic_langevin(PolynomialPotential::quadratic(1)).unwrap();
        assert_eq!(spec.step(&[0.0, 0.0], 0.01, &[0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn basic_self_interacting_drift_matches_expanded_form() {
        let spec = ProcessSpec::basic_self_interacting(1.0, 1.0).unwrap();
        let s = [0.4, 0.7, -1.3];
        let mut b = [0.0; 3];
        spec.drift(&s, &mut b);
        let want = 0.4_f64.sin() * 0.7 - 0.4_f64.cos() * -1.3;
        assert!((b[0] - want).abs() < 1e-15);
        assert!((b[1] - 0.4_f64.cos()).abs() < 1e-15);
        assert!((b[2] - 0.4_f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn angles_are_wrapped() {
        assert_eq!(wrap_angle(TAU), 0.0);
        assert!((wrap_angle(-0.5) - (TAU - 0.5)).abs() < 1e-15);
        assert!(wrap_angle(-1e-18) < TAU);
    }

    #[test]
    fn invalid_modes_rejected() {
        assert!(ProcessSpec::basic_self_interacting(0.0, 1.0).is_err());
        let bad = FourierMode::new(1.0, vec![0], Trig::Cos);
        assert!(ProcessSpec::self_interacting(1, vec![bad]).is_err());
    }

    #[test]
    fn nonfinite_drift_is_reported() {
        let spec = ProcessSpec::kinetic_langevin(PolynomialPotential::quadratic(1)).unwrap();
        let err = spec.step(&[f64::INFINITY, 0.0], 0.01, &[0.0]).unwrap_err();
        assert!(matches!(err, Error::Integration { .. }));
    }
}
