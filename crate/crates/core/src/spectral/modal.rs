//! Fast variable expanded in orthonormal modes, slow variable on a grid
//! staggered by mode parity.
//!
//! Transport only couples modes `k` and `k ± 1`. Even modes live at the
//! `nx` cell centers and odd modes at the `nx − 1` interior faces, so the
//! slow derivative in every coupling is a compact two-point difference and
//! has no odd-even kernel. The upward coupling `k → k+1` is
//! `α_k ∂ₓ + β_k φ′(x)`; the downward one is defined as its exact negative
//! adjoint in the discrete metric, which makes `T` antisymmetric to
//! rounding and `T·1 = 0`.
//!
//! ℝ×𝕋, cosine family (`1, √2 cos ku`): `α₀ = 1/√2, β₀ = 0`,
//! `α_k = ½, β_k = k/2`; sine family identical for `k ≥ 1`; `Q = −k²`.
//! Langevin, Hermite family: `α_k = √(k+1), β_k = 0`; `Q = −k`.

use super::grid::{Discretization, GridKind, GridOperator, Layout, ModeBlock, ModeFamily};
use crate::linalg::TripletBuilder;
use crate::Result;

struct Chain {
    family: ModeFamily,
    ks: std::ops::RangeInclusive<usize>,
}

fn coupling(family: ModeFamily, k: usize) -> (f64, f64) {
    match family {
        ModeFamily::Cos if k == 0 => (std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ModeFamily::Cos | ModeFamily::Sin => (0.5, 0.5 * k as f64),
        ModeFamily::Hermite => (((k + 1) as f64).sqrt(), 0.0),
    }
}

fn decay(family: ModeFamily, k: usize) -> f64 {
    match family {
        ModeFamily::Cos | ModeFamily::Sin => (k * k) as f64,
        ModeFamily::Hermite => k as f64,
    }
}

pub(crate) fn build_modal(kind: GridKind, nx: usize, n_modes: usize, radius: f64) -> Result<GridOperator> {
    let chains = match kind {
        GridKind::RTorus => vec![
            Chain {
                family: ModeFamily::Cos,
                ks: 0..=n_modes / 2,
            },
            Chain {
                family: ModeFamily::Sin,
                ks: 1..=n_modes / 2 - 1,
            },
        ],
        GridKind::Langevin { .. } => vec![Chain {
            family: ModeFamily::Hermite,
            ks: 0..=n_modes - 1,
        }],
    };
    let dx = 2.0 * radius / nx as f64;
    let xc: Vec<f64> = (0..nx).map(|i| -radius + (i as f64 + 0.5) * dx).collect();
    let xf: Vec<f64> = (1..nx).map(|a| -radius + a as f64 * dx).collect();
    let z: f64 = xc.iter().map(|&x| (-kind.phi(x)).exp() * dx).sum();
    let wc: Vec<f64> = xc.iter().map(|&x| (-kind.phi(x)).exp() * dx / z).collect();
    let wf: Vec<f64> = xf.iter().map(|&x| (-kind.phi(x)).exp() * dx / z).collect();
    let dc: Vec<f64> = xc.iter().map(|&x| kind.dphi(x)).collect();
    let df: Vec<f64> = xf.iter().map(|&x| kind.dphi(x)).collect();

    let mut blocks = Vec::new();
    let mut offset = 0;
    for ch in &chains {
        for k in ch.ks.clone() {
            let len = if k % 2 == 1 { nx - 1 } else { nx };
            blocks.push(ModeBlock {
                family: ch.family,
                k,
                offset,
                len,
            });
            offset += len;
        }
    }
    let n = offset;
    let grid_w = |b: &ModeBlock| if b.on_faces() { &wf } else { &wc };

    let mut t = TripletBuilder::new(n, n);
    let mut q = TripletBuilder::new(n, n);
    let mut weights = vec![0.0; n];
    for b in &blocks {
        weights[b.offset..b.offset + b.len].copy_from_slice(grid_w(b));
        let qk = decay(b.family, b.k);
        for r in b.offset..b.offset + b.len {
            q.push(r, r, -qk);
        }
    }
    for pair in blocks.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if lo.family != hi.family {
            continue;
        }
        let (alpha, beta) = coupling(lo.family, lo.k);
        let (g_lo, g_hi) = (grid_w(&lo), grid_w(&hi));
        // (row in hi, col in lo, value) of the upward operator.
        let mut up: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * nx);
        if !lo.on_faces() {
            for f in 0..nx - 1 {
                let drift = 0.5 * beta * df[f];
                up.push((f, f, -alpha / dx + drift));
                up.push((f, f + 1, alpha / dx + drift));
            }
        } else {
            for i in 0..nx {
                let drift = 0.5 * beta * dc[i];
                if i < nx - 1 {
                    up.push((i, i, alpha / dx + drift));
                }
                if i > 0 {
                    up.push((i, i - 1, -alpha / dx + drift));
                }
            }
        }
        for (m, c, v) in up {
            t.push(hi.offset + m, lo.offset + c, v);
            t.push(lo.offset + c, hi.offset + m, -v * g_hi[m] / g_lo[c]);
        }
    }
    let (t, q) = (t.build(), q.build());
    let l = t.linear_combination(1.0, &q, 1.0);

    let base = blocks[0];
    let mut constant = vec![0.0; n];
    let mut slab_of = vec![None; n];
    for i in 0..nx {
        constant[base.offset + i] = 1.0;
        slab_of[base.offset + i] = Some(i);
    }
    let stiffness: Vec<f64> = xf.iter().map(|&x| (-kind.phi(x)).exp() / (z * dx)).collect();
    let fast_gap = blocks
        .iter()
        .map(|b| decay(b.family, b.k))
        .filter(|&q| q > 0.0)
        .fold(f64::INFINITY, f64::min);

    let grid = GridOperator {
        kind,
        discretization: Discretization::Modal,
        nx,
        n_fast: n_modes,
        radius,
        x_centers: xc,
        layout: Layout::Modal { blocks },
        weights,
        constant,
        slab_of,
        slab_weights: wc,
        stiffness,
        t,
        q,
        l,
        fast_gap,
    };
    grid.validate()?;
    Ok(grid)
}
