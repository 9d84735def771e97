use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::eigen::lanczos_extremes;
use super::grid::GridOperator;
use crate::linalg::{CsrMatrix, TripletBuilder};
use crate::rng::stream;
use crate::{Error, Result};

pub const S_NORM_LIMIT: f64 = 0.5 + 1e-10;
pub const SYMMETRY_TOL: f64 = 1e-10;
pub const H3_TOL: f64 = 1e-8;

/// Standard normal entries, centered: a random mean-zero grid vector.
pub fn random_mean_zero(g: &GridOperator, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = stream(seed, index);
    let f: Vec<f64> = (0..g.dim()).map(|_| StandardNormal.sample(&mut rng)).collect();
    g.center(&f)
}

/// `TB` as an `N × nx` sparse matrix: transport of slow functions.
pub(crate) fn transport_of_slow(g: &GridOperator) -> CsrMatrix {
    let mut b = TripletBuilder::new(g.dim(), g.nx());
    for (r, c, v) in g.transport().triplets() {
        if let Some(i) = g.slab_of(c) {
            b.push(r, i, v);
        }
    }
    b.build()
}

/// `(TB)ᵀ W (TB)`: the form `‖TΠ·‖²` on slow functions.
pub(crate) fn macro_gram(g: &GridOperator, tb: &CsrMatrix) -> DMatrix<f64> {
    let n = g.nx();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for r in 0..tb.nrows() {
        let w = g.weights()[r];
        let row: Vec<(usize, f64)> = tb.row(r).collect();
        for &(i, a) in &row {
            for &(j, b) in &row {
                m[(i, j)] += w * a * b;
            }
        }
    }
    m
}

/// Slow Sturm–Liouville stiffness `Σ κ_f (g_{i+1} − g_i)²` as a matrix.
pub(crate) fn slow_stiffness(g: &GridOperator) -> DMatrix<f64> {
    let n = g.nx();
    let mut k = DMatrix::<f64>::zeros(n, n);
    for (f, &kappa) in g.stiffness().iter().enumerate() {
        k[(f, f)] += kappa;
        k[(f + 1, f + 1)] += kappa;
        k[(f, f + 1)] -= kappa;
        k[(f + 1, f)] -= kappa;
    }
    k
}

/// Structural checks of a DMS construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmsReport {
    pub epsilon: f64,
    /// Operator norm of `S` on the mean-zero subspace.
    pub s_norm: f64,
    /// Lower bound `1 − ‖S‖` on the spectrum of `B = I + S`.
    pub b_min: f64,
    pub s_symmetry_error: f64,
    pub pi_idempotence_error: f64,
    /// `max ‖ΠTΠf‖/‖f‖` over random `f`.
    pub h3_error: f64,
    /// `max ‖TΠTf‖/‖f‖` over random `f`; reported, not gated.
    pub t_pi_t_norm: f64,
    /// Largest entry of `(TΠ)*(TΠ) − c·(φ′∂ₓ − ∂ₓ²)Π` on slow functions,
    /// relative to the largest entry of the latter, with `c = ½` on ℝ×𝕋.
    pub macro_identity_error: f64,
}

impl DmsReport {
    pub fn passes(&self) -> bool {
        self.s_norm <= S_NORM_LIMIT
            && self.s_symmetry_error <= SYMMETRY_TOL
            && self.h3_error <= H3_TOL
            && self.b_min > 0.0
    }
}

/// The modified-norm operators `A`, `S = ε/2·P(A + A*)P` and `B = I + S`.
///
/// With the generator written `L = T + Q`, the auxiliary operator is
/// `A = −(I + (TΠ)*(TΠ))⁻¹(TΠ)*`, so that `⟨ATΠf, f⟩ ≤ 0` makes the
/// modified norm dissipative. Everything is applied matrix-free through the
/// slow `nx × nx` system `(W_x + G) h = ·` with `G = (TB)ᵀW(TB)`.
#[derive(Debug, Clone)]
pub struct DmsOperators {
    epsilon: f64,
    tb: CsrMatrix,
    gram: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    weights: Vec<f64>,
    constant: Vec<f64>,
    slab_of: Vec<Option<usize>>,
    slab_weights: Vec<f64>,
    report: Option<DmsReport>,
}

impl DmsOperators {
    /// Assembles the operators without checking them.
    pub fn new(g: &GridOperator, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::usage(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        let tb = transport_of_slow(g);
        let gram = macro_gram(g, &tb);
        let mut m = gram.clone();
        for (i, w) in g.slab_weights().iter().enumerate() {
            m[(i, i)] += w;
        }
        let chol = Cholesky::new(m).ok_or_else(|| Error::solver("W_x + (TB)ᵀW(TB) is not positive definite"))?;
        Ok(Self {
            epsilon,
            tb,
            gram,
            chol,
            weights: g.weights().to_vec(),
            constant: g.constant().to_vec(),
            slab_of: (0..g.dim()).map(|r| g.slab_of(r)).collect(),
            slab_weights: g.slab_weights().to_vec(),
            report: None,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn report(&self) -> Option<&DmsReport> {
        self.report.as_ref()
    }

    /// `(TΠ)*(TΠ)` restricted to slow functions, in the slab basis.
    pub fn macro_gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    fn solve_slow(&self, rhs: Vec<f64>) -> Vec<f64> {
        self.chol.solve(&DVector::from_vec(rhs)).iter().copied().collect()
    }

    fn slab_sums(&self, f: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.slab_weights.len()];
        for (r, s) in self.slab_of.iter().enumerate() {
            if let Some(i) = s {
                acc[*i] += self.weights[r] * f[r];
            }
        }
        acc
    }

    fn broadcast(&self, h: &[f64]) -> Vec<f64> {
        self.slab_of.iter().map(|s| s.map_or(0.0, |i| h[i])).collect()
    }

    fn mean(&self, f: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(&self.constant)
            .zip(f)
            .map(|((w, c), x)| w * c * x)
            .sum()
    }

    fn center(&self, f: &[f64]) -> Vec<f64> {
        let m = self.mean(f);
        f.iter().zip(&self.constant).map(|(x, c)| x - m * c).collect()
    }

    pub fn apply_pi(&self, f: &[f64]) -> Vec<f64> {
        let s = self.slab_sums(f);
        let h: Vec<f64> = s.iter().zip(&self.slab_weights).map(|(a, w)| a / w).collect();
        self.broadcast(&h)
    }

    pub fn apply_a(&self, f: &[f64]) -> Vec<f64> {
        let wf: Vec<f64> = self.weights.iter().zip(f).map(|(w, x)| w * x).collect();
        let rhs = self.tb.mul_vec_transposed(&wf);
        let h = self.solve_slow(rhs);
        self.broadcast(&h).into_iter().map(|x| -x).collect()
    }

    pub fn apply_a_adjoint(&self, f: &[f64]) -> Vec<f64> {
        let h = self.solve_slow(self.slab_sums(f));
        self.tb.mul_vec(&h).into_iter().map(|x| -x).collect()
    }

    pub fn apply_s(&self, f: &[f64]) -> Vec<f64> {
        let pf = self.center(f);
        let a = self.apply_a(&pf);
        let b = self.apply_a_adjoint(&pf);
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * self.epsilon * (x + y)).collect();
        self.center(&sum)
    }

    pub fn apply_b(&self, f: &[f64]) -> Vec<f64> {
        self.apply_s(f).iter().zip(f).map(|(s, x)| s + x).collect()
    }

    /// `‖f‖_B² = ⟨f, (I + S) f⟩`
    pub fn b_norm_sq(&self, f: &[f64]) -> f64 {
        let bf = self.apply_b(f);
        self.weights.iter().zip(f).zip(&bf).map(|((w, a), b)| w * a * b).sum()
    }

    /// `‖S‖` on the mean-zero subspace by Lanczos on `W^{½} S W^{−½}`.
    pub fn s_norm(&self, seed: u64) -> f64 {
        let sq: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let mut d: Vec<f64> = sq.iter().zip(&self.constant).map(|(s, c)| s * c).collect();
        let nd = crate::linalg::norm(&d);
        d.iter_mut().for_each(|x| *x /= nd);
        let mut rng = stream(seed, u64::MAX);
        let start: Vec<f64> = (0..sq.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let steps = (2 * self.slab_weights.len() + 4).min(sq.len() - 1).min(400);
        let out = lanczos_extremes(
            |y| {
                let f: Vec<f64> = y.iter().zip(&sq).map(|(a, s)| a / s).collect();
                self.apply_s(&f).iter().zip(&sq).map(|(a, s)| a * s).collect()
            },
            start,
            &[d],
            steps,
        );
        out.abs_max()
    }

    /// Computes every structural check; `seed` drives the random probes.
    pub fn check(&self, g: &GridOperator, seed: u64) -> DmsReport {
        let s_norm = self.s_norm(seed);
        let mut sym = 0.0_f64;
        let mut idem = 0.0_f64;
        let mut h3 = 0.0_f64;
        let mut tpt = 0.0_f64;
        for k in 0..4 {
            let f = random_mean_zero(g, seed, 2 * k);
            let h = random_mean_zero(g, seed, 2 * k + 1);
            let (nf, nh) = (g.norm(&f), g.norm(&h));
            let lhs = g.inner(&f, &self.apply_s(&h));
            let rhs = g.inner(&self.apply_s(&f), &h);
            sym = sym.max((lhs - rhs).abs() / (nf * nh));
            let pf = self.apply_pi(&f);
            let ppf = self.apply_pi(&pf);
            let diff: Vec<f64> = ppf.iter().zip(&pf).map(|(a, b)| a - b).collect();
            idem = idem.max(g.norm(&diff) / nf);
            let tpf = g.apply_t(&pf);
            h3 = h3.max(g.norm(&self.apply_pi(&tpf)) / nf);
            let tf = g.apply_t(&f);
            tpt = tpt.max(g.norm(&g.apply_t(&self.apply_pi(&tf))) / nf);
        }
        let target = slow_stiffness(g) * g.kind().macro_factor();
        let scale = target.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let err = (&self.gram - &target).iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        DmsReport {
            epsilon: self.epsilon,
            s_norm,
            b_min: 1.0 - s_norm,
            s_symmetry_error: sym,
            pi_idempotence_error: idem,
            h3_error: h3,
            t_pi_t_norm: tpt,
            macro_identity_error: err / scale,
        }
    }
}

/// Assembles and checks the DMS operators; fails when any invariant is
/// violated, in particular when `‖S‖ > ½` (ε is not reduced automatically).
pub fn build_dms(g: &GridOperator, epsilon: f64) -> Result<DmsOperators> {
    let mut d = DmsOperators::new(g, epsilon)?;
    let rep = d.check(g, 0x0d35);
    d.report = Some(rep);
    if !rep.passes() {
        return Err(Error::build(format!(
            "DMS operators at ε = {epsilon}: ‖S‖ = {:.12}, symmetry {:.2e}, ΠTΠ {:.2e}",
            rep.s_norm, rep.s_symmetry_error, rep.h3_error
        )));
    }
    Ok(d)
}
