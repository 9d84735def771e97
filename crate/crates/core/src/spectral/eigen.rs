//! Matrix-free symmetric eigensolvers in the Euclidean inner product.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::linalg::{axpy, dot, norm};

fn orthogonalize_against(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            axpy(-c, b, v);
        }
    }
}

/// Extreme Ritz values of `A` from `steps` Lanczos iterations with full
/// reorthogonalization; stops early on an invariant subspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOutcome {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl LanczosOutcome {
    pub fn abs_max(&self) -> f64 {
        self.min.abs().max(self.max.abs())
    }
}

pub fn lanczos_extremes(
    mut apply: impl FnMut(&[f64]) -> Vec<f64>,
    start: Vec<f64>,
    deflate: &[Vec<f64>],
    steps: usize,
) -> LanczosOutcome {
    let mut v = start;
    orthogonalize_against(&mut v, deflate);
    let nv = norm(&v);
    assert!(nv > 0.0, "start vector lies in the deflated space");
    v.iter_mut().for_each(|x| *x /= nv);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);
    let mut scale = 0.0_f64;
    for _ in 0..steps {
        let mut w = apply(&v);
        orthogonalize_against(&mut w, deflate);
        let a = dot(&w, &v);
        basis.push(v);
        alpha.push(a);
        orthogonalize_against(&mut w, &basis);
        let b = norm(&w);
        scale = scale.max(a.abs()).max(b);
        if b <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        beta.push(b);
        v = w.into_iter().map(|x| x / b).collect();
    }
    let k = alpha.len();
    let mut tri = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        tri[(i, i)] = alpha[i];
        if i + 1 < k {
            tri[(i, i + 1)] = beta[i];
            tri[(i + 1, i)] = beta[i];
        }
    }
    let ev = SymmetricEigen::new(tri).eigenvalues;
    LanczosOutcome {
        min: ev.min(),
        max: ev.max(),
        steps: k,
    }
}

#[derive(Debug, Clone)]
pub struct LobpcgOutcome {
    /// Ritz values, ascending.
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Orthonormalize `cols` in place (two-pass Gram–Schmidt against `fixed`
/// and each other); columns whose norm collapses below `drop` are removed.
fn orthonormalize(cols: Vec<Vec<f64>>, fixed: &[Vec<f64>], drop: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    for mut c in cols {
        let n0 = norm(&c);
        if n0 == 0.0 {
            continue;
        }
        orthogonalize_against(&mut c, fixed);
        orthogonalize_against(&mut c, &out);
        let n1 = norm(&c);
        if n1 > drop * n0 {
            c.iter_mut().for_each(|x| *x /= n1);
            out.push(c);
        }
    }
    out
}

/// Smallest eigenpairs of a symmetric operator on the orthogonal complement
/// of `constraints` (orthonormal), by locally optimal block preconditioned
/// conjugate gradients. Converged when the first eigenpair's residual is
/// below `tol`.
pub fn lobpcg_smallest(
    mut apply: impl FnMut(&[f64]) -> Vec<f64>,
    mut precondition: impl FnMut(&[f64]) -> Vec<f64>,
    constraints: &[Vec<f64>],
    initial: Vec<Vec<f64>>,
    tol: f64,
    max_iter: usize,
) -> LobpcgOutcome {
    let m = initial.len();
    let mut x = orthonormalize(initial, constraints, 1e-10);
    assert_eq!(x.len(), m, "initial block is rank deficient");
    let mut p: Vec<Vec<f64>> = Vec::new();
    let mut values = vec![0.0; m];
    let mut residuals = vec![f64::INFINITY; m];
    let mut iterations = 0;
    let mut converged = false;

    // Rayleigh–Ritz on an orthonormal basis; returns rotated (X, AX, Θ, coefficients).
    let mut rayleigh_ritz = |basis: &[Vec<f64>]| {
        let images: Vec<Vec<f64>> = basis.iter().map(|b| apply(b)).collect();
        let k = basis.len();
        let mut g = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let v = 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]));
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(g);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        (images, eig, order)
    };

    let combine = |cols: &[Vec<f64>], coef: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; cols[0].len()];
        for (c, a) in cols.iter().zip(coef) {
            axpy(*a, c, &mut out);
        }
        out
    };

    let (mut ax, eig, order) = rayleigh_ritz(&x);
    {
        let coefs: Vec<Vec<f64>> = order
            .iter()
            .take(m)
            .map(|&j| eig.eigenvectors.column(j).iter().copied().collect())
            .collect();
        let nx: Vec<Vec<f64>> = coefs.iter().map(|c| combine(&x, c)).collect();
        let nax: Vec<Vec<f64>> = coefs.iter().map(|c| combine(&ax, c)).collect();
        for (i, &j) in order.iter().take(m).enumerate() {
            values[i] = eig.eigenvalues[j];
        }
        x = nx;
        ax = nax;
    }

    while iterations < max_iter {
        let r: Vec<Vec<f64>> = (0..m)
            .map(|i| ax[i].iter().zip(&x[i]).map(|(a, b)| a - values[i] * b).collect())
            .collect();
        for i in 0..m {
            residuals[i] = norm(&r[i]);
        }
        if residuals[0] <= tol {
            converged = true;
            break;
        }
        iterations += 1;
        let w: Vec<Vec<f64>> = r.iter().map(|ri| precondition(ri)).collect();
        let mut cols = x.clone();
        let extra = orthonormalize(
            w.into_iter().chain(p.iter().cloned()).collect(),
            &[constraints, &x].concat(),
            1e-12,
        );
        let n_extra = extra.len();
        cols.extend(extra);
        let (images, eig, order) = rayleigh_ritz(&cols);
        let coefs: Vec<Vec<f64>> = order
            .iter()
            .take(m)
            .map(|&j| eig.eigenvectors.column(j).iter().copied().collect())
            .collect();
        let nx: Vec<Vec<f64>> = coefs.iter().map(|c| combine(&cols, c)).collect();
        let nax: Vec<Vec<f64>> = coefs.iter().map(|c| combine(&images, c)).collect();
        p = if n_extra > 0 {
            coefs.iter().map(|c| combine(&cols[m..], &c[m..])).collect()
        } else {
            Vec::new()
        };
        for (i, &j) in order.iter().take(m).enumerate() {
            values[i] = eig.eigenvalues[j];
        }
        x = nx;
        ax = nax;
    }
    if !converged {
        for i in 0..m {
            let r: Vec<f64> = ax[i].iter().zip(&x[i]).map(|(a, b)| a - values[i] * b).collect();
            residuals[i] = norm(&r);
        }
        converged = residuals[0] <= tol;
    }
    LobpcgOutcome {
        values,
        vectors: x,
        residuals,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_op(d: &[f64]) -> impl FnMut(&[f64]) -> Vec<f64> + '_ {
        move |v| v.iter().zip(d).map(|(a, b)| a * b).collect()
    }

    #[test]
    fn lanczos_on_diagonal() {
        let d: Vec<f64> = (0..50).map(|i| i as f64 - 10.0).collect();
        let out = lanczos_extremes(diag_op(&d), vec![1.0; 50], &[], 60);
        assert!((out.min + 10.0).abs() < 1e-10 && (out.max - 39.0).abs() < 1e-10);
        assert_eq!(out.abs_max(), out.max.abs());
    }

    #[test]
    fn lobpcg_finds_smallest_outside_constraint() {
        let n = 200;
        let d: Vec<f64> = (0..n).map(|i| 0.5 + (i * i) as f64).collect();
        let mut e0 = vec![0.0; n];
        e0[0] = 1.0;
        let init: Vec<Vec<f64>> = (0..3)
            .map(|k| (0..n).map(|i| ((i * (k + 3)) as f64).sin() + 0.1).collect())
            .collect();
        let out = lobpcg_smallest(
            diag_op(&d),
            |r| r.iter().zip(&d).map(|(a, b)| a / (b + 1.0)).collect(),
            &[e0],
            init,
            1e-10,
            500,
        );
        assert!(out.converged, "{:?}", out.residuals);
        assert!((out.values[0] - 1.5).abs() < 1e-12, "{}", out.values[0]);
        assert!((out.values[1] - 4.5).abs() < 1e-9);
    }
}
