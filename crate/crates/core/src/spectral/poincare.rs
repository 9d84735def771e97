use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::dms::{macro_gram, slow_stiffness, transport_of_slow};
use super::grid::GridOperator;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincareConstants {
    /// Smallest nonzero eigenvalue of `−Q` on one slab.
    pub gap_u: f64,
    /// Smallest nonzero eigenvalue of `g ↦ φ′g′ − g″` in `L²(e^{−φ})` on the
    /// truncated slow domain.
    pub c_p: f64,
    /// `min ‖TΠf‖² / ‖Πf − μf‖²` over slow mean-zero `f`.
    pub macro_min: f64,
    /// `c` in the identity `‖TΠf‖² = c·∫(∂ₓΠf)² dμ`.
    pub macro_factor: f64,
}

/// Second-smallest eigenvalue of `W^{−½} K W^{−½}` (the smallest is the
/// constant mode).
fn second_eigenvalue(k: &DMatrix<f64>, w: &[f64]) -> Result<f64> {
    let n = w.len();
    let mut m = k.clone();
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] /= (w[i] * w[j]).sqrt();
        }
    }
    let m = 0.5 * (&m + m.transpose());
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.get(1)
        .copied()
        .ok_or_else(|| Error::solver("slow grid needs at least two cells"))
}

pub fn poincare_constants(g: &GridOperator) -> Result<PoincareConstants> {
    let w = g.slab_weights();
    let c_p = second_eigenvalue(&slow_stiffness(g), w)?;
    let gram = macro_gram(g, &transport_of_slow(g));
    let macro_min = second_eigenvalue(&gram, w)?;
    Ok(PoincareConstants {
        gap_u: g.fast_gap(),
        c_p,
        macro_min,
        macro_factor: g.kind().macro_factor(),
    })
}
