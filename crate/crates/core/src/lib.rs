//! Quantitative consequences of L² hypocoercivity for Markov processes.
//!
//! The crate evaluates the explicit deviation and hitting-time bounds that
//! follow from a hypocoercive (modified-norm) decay estimate, and checks
//! them against three example diffusions:
//!
//! * kinetic Langevin dynamics with a polynomial confining potential,
//! * a self-interacting diffusion on the torus lifted to a finite system,
//! * a hypoelliptic diffusion on ℝ×𝕋 driven by `V(x) = x²/√(1+x²)`.
//!
//! Modules:
//!
//! * [`bounds`]: closed-form rates, Λ-bounds, hitting-time moment bounds.
//! * [`processes`]: process definitions, Euler–Maruyama paths, exact
//!   samplers of the invariant measures.
//! * [`montecarlo`]: tail probabilities with Clopper–Pearson bounds, hitting
//!   times, exponential moments, growth profiles.
//! * [`spectral`]: finite-volume generators, the DMS operators, the
//!   hypocoercivity certificate ρ and semigroup decay checks.
//! * [`dirichlet`]: the exit-time boundary problem and its Lyapunov constant.
//! * [`assumptions`]: Hörmander and Langevin-potential condition checkers.

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::too_many_arguments
)]

pub mod assumptions;
pub mod bounds;
pub mod dirichlet;
mod error;
pub mod linalg;
pub mod montecarlo;
#[cfg(feature = "oracle")]
pub mod oracle;
pub mod processes;
pub mod quadrature;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};

pub use bounds::{BoundInputs, BoundReport, Extended, NormConvention};
pub use dirichlet::DirichletSolution;
pub use montecarlo::{ExpMomentEstimate, HittingSample, Region, TailEstimate};
pub use processes::{
    FourierMode, Initial, InvariantMeasure, Observable, PolynomialPotential, ProcessKind, ProcessSpec, Trajectory,
};
pub use spectral::{DmsOperators, GridOperator, RhoEstimate};
