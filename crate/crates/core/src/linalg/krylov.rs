use super::{dot, norm, CsrMatrix};

#[derive(Debug, Clone)]
pub struct KrylovOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// Final ‖b − Ax‖₂ / ‖b‖₂.
    pub relative_residual: f64,
    pub converged: bool,
}

/// Jacobi-preconditioned BiCGSTAB.
pub fn bicgstab(a: &CsrMatrix, b: &[f64], x0: Option<&[f64]>, rel_tol: f64, max_iter: usize) -> KrylovOutcome {
    let n = b.len();
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            let d = a.get(i, i);
            if d.abs() > 0.0 {
                1.0 / d
            } else {
                1.0
            }
        })
        .collect();
    let precond = |v: &[f64]| v.iter().zip(&diag).map(|(x, d)| x * d).collect::<Vec<_>>();

    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let ax = a.mul_vec(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let r_hat = r.clone();
    let b_norm = norm(b).max(f64::MIN_POSITIVE);
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut res = norm(&r) / b_norm;
    let mut it = 0;
    while it < max_iter && res > rel_tol {
        it += 1;
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let p_hat = precond(&p);
        v = a.mul_vec(&p_hat);
        alpha = rho / dot(&r_hat, &v);
        let s: Vec<f64> = r.iter().zip(&v).map(|(r, v)| r - alpha * v).collect();
        if norm(&s) / b_norm <= rel_tol {
            for i in 0..n {
                x[i] += alpha * p_hat[i];
            }
            break;
        }
        let s_hat = precond(&s);
        let t = a.mul_vec(&s_hat);
        omega = dot(&t, &s) / dot(&t, &t);
        for i in 0..n {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
            r[i] = s[i] - omega * t[i];
        }
        res = norm(&r) / b_norm;
        if omega == 0.0 {
            break;
        }
    }
    // Report the true residual rather than the recursively updated one.
    let ax = a.mul_vec(&x);
    let true_res = b.iter().zip(&ax).map(|(b, a)| (b - a) * (b - a)).sum::<f64>().sqrt() / b_norm;
    KrylovOutcome {
        solution: x,
        iterations: it,
        relative_residual: true_res,
        converged: true_res <= rel_tol * 10.0,
    }
}
