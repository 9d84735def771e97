//! Discretized generators, the DMS modified norm, and a certified discrete
//! decay rate.
//!
//! Two discretizations are provided. [`Discretization::Modal`] expands the
//! fast variable in orthonormal modes on a parity-staggered slow grid; its
//! transport is exactly antisymmetric, `ΠTΠ = 0` holds exactly and the
//! symmetric part of `−L` is `−Q` alone, so the certificate with `S = 0`
//! vanishes as it does in the continuum. [`Discretization::FiniteVolume`]
//! is a nodal scheme in `(x, fast)` whose upwind variant is an M-matrix; it
//! is the one used for boundary problems. Its numerical viscosity makes the
//! symmetric part of `−L` coercive at `O(Δx)`, so it is unsuitable for the
//! certificate.
//!
//! The ρ certificate is the smallest eigenvalue of
//! `−½[(L + SL) + (L + SL)*]` on the weighted mean-zero subspace.

mod certificate;
mod dms;
mod eigen;
mod expm;
mod fv;
mod grid;
mod modal;
mod poincare;

pub use certificate::{
    apply_h, best_epsilon, certify, dissipation, epsilon_scan, estimate_rho, negative_control, Certificate,
    EpsilonScanPoint, RhoEstimate, CERTIFICATE_TOL,
};
pub use dms::{build_dms, random_mean_zero, DmsOperators, DmsReport, H3_TOL, SYMMETRY_TOL, S_NORM_LIMIT};
pub use eigen::{lanczos_extremes, lobpcg_smallest, LanczosOutcome, LobpcgOutcome};
pub use expm::{decay_check, decay_check_vectors, expm_action, DecayPoint, DecayReport, DECAY_REL_TOL};
pub use grid::{
    hermite_normalized, Discretization, GridInvariants, GridKind, GridOperator, Layout, ModeBlock, ModeFamily, Scheme,
    BOUNDARY_WEIGHT_TOL, CONSERVATION_TOL, INVARIANCE_TOL, WEIGHT_SUM_TOL,
};
pub use poincare::{poincare_constants, PoincareConstants};

use crate::processes::PolynomialPotential;
use crate::{Error, Result};

/// Default fast extent `|v| ≤ V_MAX` of nodal Langevin grids.
pub const V_MAX: f64 = 8.0;

fn check_sizes(nx: usize, n_fast: usize, radius: f64, modal: bool) -> Result<()> {
    if nx < 16 || n_fast < 16 {
        return Err(Error::build(format!("need nx, n_fast ≥ 16; got {nx}×{n_fast}")));
    }
    if modal && n_fast % 2 == 1 {
        return Err(Error::build(format!(
            "modal grids need an even mode count, got {n_fast}"
        )));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::build(format!("R must be positive and finite, got {radius}")));
    }
    Ok(())
}

/// The ℝ×𝕋 generator `cos u ∂ₓ + V′(x) sin u ∂ᵤ + ∂ᵤ²` on `[−R, R]×𝕋`.
pub fn build_rtorus_generator(nx: usize, nu: usize, radius: f64, disc: Discretization) -> Result<GridOperator> {
    check_sizes(nx, nu, radius, disc == Discretization::Modal)?;
    match disc {
        Discretization::Modal => modal::build_modal(GridKind::RTorus, nx, nu, radius),
        Discretization::FiniteVolume { scheme } => fv::build_nodal(
            GridKind::RTorus,
            nx,
            nu,
            radius,
            fv::FastAxis {
                start: 0.0,
                length: std::f64::consts::TAU,
                periodic: true,
            },
            scheme,
            |x, u| (-crate::processes::rtorus_v(x)).exp() * u.sin(),
            |_| 1.0,
        ),
    }
}

/// The 1-d kinetic Langevin generator `v∂ₓ − (U′(x) + v)∂ᵥ + ∂ᵥ²`.
pub fn build_langevin_generator(
    nx: usize,
    nv: usize,
    radius: f64,
    potential: &PolynomialPotential,
    disc: Discretization,
) -> Result<GridOperator> {
    if potential.dim != 1 {
        return Err(Error::build(format!(
            "Langevin grids are one-dimensional in x; got d = {}",
            potential.dim
        )));
    }
    check_sizes(nx, nv, radius, false)?;
    let kind = GridKind::Langevin {
        potential: potential.clone(),
    };
    match disc {
        Discretization::Modal => modal::build_modal(kind, nx, nv, radius),
        Discretization::FiniteVolume { scheme } => {
            let p = potential.clone();
            fv::build_nodal(
                kind,
                nx,
                nv,
                radius,
                fv::FastAxis {
                    start: -V_MAX,
                    length: 2.0 * V_MAX,
                    periodic: false,
                },
                scheme,
                move |x, v| -(-p.p(x) - 0.5 * v * v).exp(),
                |v| (-0.5 * v * v).exp(),
            )
        }
    }
}
