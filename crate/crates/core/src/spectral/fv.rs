//! Nodal finite volumes built from a discrete stream function.
//!
//! The stationary flux `J = μ·(drift of the transport part)` is divergence
//! free, so `J = (∂_y ψ, −∂ₓψ)` for a stream function `ψ`. Face fluxes are
//! differences of `ψ` at cell corners, hence every cell balances exactly.
//! `ψ = 0` on the non-periodic outer boundary gives no-flux walls.

use nalgebra::{DMatrix, SymmetricEigen};

use super::grid::{Discretization, GridKind, GridOperator, Layout, Scheme};
use crate::linalg::TripletBuilder;
use crate::{Error, Result};

pub(crate) struct FastAxis {
    pub start: f64,
    pub length: f64,
    pub periodic: bool,
}

pub(crate) fn build_nodal(
    kind: GridKind,
    nx: usize,
    nf: usize,
    radius: f64,
    axis: FastAxis,
    scheme: Scheme,
    psi: impl Fn(f64, f64) -> f64,
    fast_density: impl Fn(f64) -> f64,
) -> Result<GridOperator> {
    let dx = 2.0 * radius / nx as f64;
    let dy = axis.length / nf as f64;
    let xa: Vec<f64> = (0..=nx).map(|a| -radius + a as f64 * dx).collect();
    let xc: Vec<f64> = (0..nx).map(|i| -radius + (i as f64 + 0.5) * dx).collect();
    let yb: Vec<f64> = (0..=nf).map(|b| axis.start + b as f64 * dy).collect();
    let yc: Vec<f64> = (0..nf).map(|j| axis.start + (j as f64 + 0.5) * dy).collect();

    let corner = |a: usize, b: usize| -> f64 {
        if a == 0 || a == nx || (!axis.periodic && (b == 0 || b == nf)) {
            0.0
        } else {
            psi(xa[a], yb[if axis.periodic { b % nf } else { b }])
        }
    };
    let slow_density: Vec<f64> = xc.iter().map(|&x| (-kind.phi(x)).exp()).collect();
    let fast_c: Vec<f64> = yc.iter().map(|&y| fast_density(y)).collect();
    let fast_f: Vec<f64> = yb.iter().map(|&y| fast_density(y)).collect();

    let n = nx * nf;
    let idx = |i: usize, j: usize| i * nf + j;
    let mut mass = vec![0.0; n];
    for i in 0..nx {
        for j in 0..nf {
            mass[idx(i, j)] = slow_density[i] * fast_c[j] * dx * dy;
        }
    }
    let z: f64 = mass.iter().sum();

    // (c, n, flux c→n) for every interior face, once per orientation.
    let mut faces: Vec<(usize, usize, f64)> = Vec::with_capacity(4 * n);
    let mut fast_faces: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * n);
    for i in 0..nx {
        for j in 0..nf {
            if i + 1 < nx {
                let f = corner(i + 1, j + 1) - corner(i + 1, j);
                faces.push((idx(i, j), idx(i + 1, j), f));
                faces.push((idx(i + 1, j), idx(i, j), -f));
            }
            let up = if j + 1 < nf {
                Some(j + 1)
            } else if axis.periodic {
                Some(0)
            } else {
                None
            };
            if let Some(jn) = up {
                let g = -(corner(i + 1, j + 1) - corner(i, j + 1));
                faces.push((idx(i, j), idx(i, jn), g));
                faces.push((idx(i, jn), idx(i, j), -g));
                let k = slow_density[i] * fast_f[j + 1] * dx / dy;
                fast_faces.push((idx(i, j), idx(i, jn), k));
            }
        }
    }

    let mut t = TripletBuilder::new(n, n);
    let mut visc = TripletBuilder::new(n, n);
    let mut q = TripletBuilder::new(n, n);
    let mut t_diag = vec![0.0; n];
    let mut v_diag = vec![0.0; n];
    let mut q_diag = vec![0.0; n];
    for &(c, nb, f) in &faces {
        let tc = 0.5 * f / mass[c];
        t.push(c, nb, tc);
        t_diag[c] -= tc;
        let vc = 0.5 * f.abs() / mass[c];
        visc.push(c, nb, vc);
        v_diag[c] -= vc;
    }
    for &(a, b, k) in &fast_faces {
        q.push(a, b, k / mass[a]);
        q.push(b, a, k / mass[b]);
        q_diag[a] -= k / mass[a];
        q_diag[b] -= k / mass[b];
    }
    for c in 0..n {
        t.push(c, c, t_diag[c]);
        visc.push(c, c, v_diag[c]);
        q.push(c, c, q_diag[c]);
    }
    let (t, visc, q) = (t.build(), visc.build(), q.build());
    let tq = t.linear_combination(1.0, &q, 1.0);
    let l = match scheme {
        Scheme::Centered => tq,
        Scheme::Upwind => tq.linear_combination(1.0, &visc, 1.0),
    };

    let weights: Vec<f64> = mass.iter().map(|m| m / z).collect();
    let slab_weights: Vec<f64> = (0..nx)
        .map(|i| weights[idx(i, 0)..idx(i, 0) + nf].iter().sum())
        .collect();
    let fast_total: f64 = fast_c.iter().sum::<f64>() * dy;
    let stiffness: Vec<f64> = xa[1..nx]
        .iter()
        .map(|&x| (-kind.phi(x)).exp() * fast_total / (z * dx))
        .collect();
    let fast_gap = slab_gap(&q, &weights, nf, nx / 2)?;

    let grid = GridOperator {
        kind,
        discretization: Discretization::FiniteVolume { scheme },
        nx,
        n_fast: nf,
        radius,
        x_centers: xc,
        layout: Layout::Nodal {
            fast_centers: yc,
            fast_step: dy,
            periodic: axis.periodic,
        },
        weights,
        constant: vec![1.0; n],
        slab_of: (0..n).map(|r| Some(r / nf)).collect(),
        slab_weights,
        stiffness,
        t,
        q,
        l,
        fast_gap,
    };
    grid.validate()?;
    Ok(grid)
}

/// Second-smallest eigenvalue of the weight-symmetrized `−Q` block of slab `i`.
fn slab_gap(q: &crate::linalg::CsrMatrix, w: &[f64], nf: usize, i: usize) -> Result<f64> {
    let base = i * nf;
    let mut m = DMatrix::<f64>::zeros(nf, nf);
    for a in 0..nf {
        for (c, v) in q.row(base + a) {
            let b = c - base;
            m[(a, b)] = -v * (w[base + a] / w[base + b]).sqrt();
        }
    }
    let m = 0.5 * (&m + m.transpose());
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.get(1)
        .copied()
        .ok_or_else(|| Error::build("fast axis needs at least two cells"))
}
