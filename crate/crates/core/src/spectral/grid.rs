use serde::{Deserialize, Serialize};

use crate::linalg::{max_abs, wdot, CompensatedSum, CsrMatrix};
use crate::processes::{rtorus_v, vprime, PolynomialPotential};
use crate::{Error, Result};

/// Which generator a grid discretizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridKind {
    /// `cos u ∂ₓ + V′(x) sin u ∂ᵤ + ∂ᵤ²` on `[−R, R]×𝕋`.
    RTorus,
    /// `v ∂ₓ − U′(x) ∂ᵥ − v ∂ᵥ + ∂ᵥ²` on `[−R, R]×ℝ`.
    Langevin { potential: PolynomialPotential },
}

impl GridKind {
    /// Slow-variable potential `φ`, with slow marginal `∝ e^{−φ}`.
    pub fn phi(&self, x: f64) -> f64 {
        match self {
            GridKind::RTorus => rtorus_v(x),
            GridKind::Langevin { potential } => potential.p(x),
        }
    }

    pub fn dphi(&self, x: f64) -> f64 {
        match self {
            GridKind::RTorus => vprime(x),
            GridKind::Langevin { potential } => potential.dp(x),
        }
    }

    /// `E[(transport of a slow function)²] / E[g′²]`: ½ for `cos u`, 1 for `v`.
    pub fn macro_factor(&self) -> f64 {
        match self {
            GridKind::RTorus => 0.5,
            GridKind::Langevin { .. } => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Centered,
    Upwind,
}

/// Nodal finite volumes in `(x, fast)`, or orthonormal fast modes on a
/// parity-staggered slow grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Discretization {
    Modal,
    FiniteVolume { scheme: Scheme },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeFamily {
    /// `1, √2 cos ku`
    Cos,
    /// `√2 sin ku`
    Sin,
    /// Normalized probabilists' Hermite polynomials.
    Hermite,
}

/// One fast mode over all slow nodes of its parity grid: centers for even
/// `k`, interior faces for odd `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeBlock {
    pub family: ModeFamily,
    pub k: usize,
    pub offset: usize,
    pub len: usize,
}

impl ModeBlock {
    pub fn on_faces(&self) -> bool {
        self.k % 2 == 1
    }

    /// Basis function value at fast coordinate `y`.
    pub fn basis(&self, y: f64) -> f64 {
        match self.family {
            ModeFamily::Cos if self.k == 0 => 1.0,
            ModeFamily::Cos => std::f64::consts::SQRT_2 * (self.k as f64 * y).cos(),
            ModeFamily::Sin => std::f64::consts::SQRT_2 * (self.k as f64 * y).sin(),
            ModeFamily::Hermite => hermite_normalized(self.k, y),
        }
    }
}

/// `He_k(y)/√k!`
pub fn hermite_normalized(k: usize, y: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for j in 0..k {
        let next = (y * cur - (j as f64).sqrt() * prev) / ((j + 1) as f64).sqrt();
        prev = cur;
        cur = next;
    }
    cur
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Layout {
    /// Index `i·n_fast + j`; `fast_centers[j]` with spacing `fast_step`.
    Nodal {
        fast_centers: Vec<f64>,
        fast_step: f64,
        periodic: bool,
    },
    Modal {
        blocks: Vec<ModeBlock>,
    },
}

/// Structural diagnostics of a discretized generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridInvariants {
    /// `|Σw − 1|`
    pub weight_sum_error: f64,
    /// `max |L·1|`
    pub conservation_error: f64,
    /// `max |(w⊙1)ᵀL|`
    pub invariance_error: f64,
    /// Largest `|w_r T_rc + w_c T_cr|` relative to the largest `|w_r T_rc|`.
    pub antisymmetry_error: f64,
    /// Most negative off-diagonal entry of `L` (0 when none).
    pub min_offdiag: f64,
    /// Slow-marginal mass of the two outermost slabs.
    pub boundary_weight: f64,
}

pub const WEIGHT_SUM_TOL: f64 = 1e-12;
pub const CONSERVATION_TOL: f64 = 1e-10;
pub const INVARIANCE_TOL: f64 = 1e-8;
pub const BOUNDARY_WEIGHT_TOL: f64 = 1e-8;

/// A generator `L = T + Q` on a truncated domain, with its discrete
/// invariant measure.
///
/// Vectors live in a weighted space with diagonal metric `weights`; the
/// discrete constant function is `constant` and `μ(f) = Σ wᵢ cᵢ fᵢ`. On
/// nodal grids `constant` is all ones. `T` is exactly antisymmetric in the
/// metric, `Q` is symmetric and acts on the fast variable only.
#[derive(Debug, Clone)]
pub struct GridOperator {
    pub(crate) kind: GridKind,
    pub(crate) discretization: Discretization,
    pub(crate) nx: usize,
    pub(crate) n_fast: usize,
    pub(crate) radius: f64,
    pub(crate) x_centers: Vec<f64>,
    pub(crate) layout: Layout,
    pub(crate) weights: Vec<f64>,
    pub(crate) constant: Vec<f64>,
    /// Slow slab of each index in the broadcast map, if any.
    pub(crate) slab_of: Vec<Option<usize>>,
    pub(crate) slab_weights: Vec<f64>,
    /// Conductances of the `nx − 1` interior slow faces for the slow
    /// Sturm–Liouville form `Σ κ (g_{i+1} − g_i)²`.
    pub(crate) stiffness: Vec<f64>,
    pub(crate) t: CsrMatrix,
    pub(crate) q: CsrMatrix,
    pub(crate) l: CsrMatrix,
    pub(crate) fast_gap: f64,
}

impl GridOperator {
    pub fn kind(&self) -> &GridKind {
        &self.kind
    }

    pub fn discretization(&self) -> Discretization {
        self.discretization
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Fast resolution: cells in `u`/`v`, or number of modes.
    pub fn n_fast(&self) -> usize {
        self.n_fast
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn x_domain(&self) -> [f64; 2] {
        [-self.radius, self.radius]
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.radius / self.nx as f64
    }

    pub fn x_centers(&self) -> &[f64] {
        &self.x_centers
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn constant(&self) -> &[f64] {
        &self.constant
    }

    /// `w ⊙ 1`, the discrete invariant measure as a linear functional.
    pub fn mu_vector(&self) -> Vec<f64> {
        self.weights.iter().zip(&self.constant).map(|(w, c)| w * c).collect()
    }

    pub fn slab_weights(&self) -> &[f64] {
        &self.slab_weights
    }

    pub fn stiffness(&self) -> &[f64] {
        &self.stiffness
    }

    pub fn slab_of(&self, index: usize) -> Option<usize> {
        self.slab_of[index]
    }

    pub fn generator(&self) -> &CsrMatrix {
        &self.l
    }

    pub fn transport(&self) -> &CsrMatrix {
        &self.t
    }

    pub fn fast_part(&self) -> &CsrMatrix {
        &self.q
    }

    /// Smallest nonzero eigenvalue of `−Q` on one slab.
    pub fn fast_gap(&self) -> f64 {
        self.fast_gap
    }

    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        wdot(&self.weights, f, g)
    }

    pub fn norm(&self, f: &[f64]) -> f64 {
        self.inner(f, f).sqrt()
    }

    pub fn mean(&self, f: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(&self.constant)
            .zip(f)
            .map(|((w, c), x)| w * c * x)
            .collect::<CompensatedSum>()
            .value()
    }

    /// `f − μ(f)·1`
    pub fn center(&self, f: &[f64]) -> Vec<f64> {
        let m = self.mean(f);
        f.iter().zip(&self.constant).map(|(x, c)| x - m * c).collect()
    }

    pub fn apply_l(&self, f: &[f64]) -> Vec<f64> {
        self.l.mul_vec(f)
    }

    pub fn apply_t(&self, f: &[f64]) -> Vec<f64> {
        self.t.mul_vec(f)
    }

    pub fn apply_q(&self, f: &[f64]) -> Vec<f64> {
        self.q.mul_vec(f)
    }

    /// `L* f = W⁻¹ Lᵀ W f`
    pub fn apply_l_adjoint(&self, f: &[f64]) -> Vec<f64> {
        let wf: Vec<f64> = self.weights.iter().zip(f).map(|(w, x)| w * x).collect();
        let mut y = self.l.mul_vec_transposed(&wf);
        for (yi, w) in y.iter_mut().zip(&self.weights) {
            *yi /= w;
        }
        y
    }

    /// Conditional fast average per slab: `(Bᵀ W f)_i / W_i`.
    pub fn slab_average(&self, f: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.nx];
        for (r, s) in self.slab_of.iter().enumerate() {
            if let Some(i) = s {
                acc[*i] += self.weights[r] * f[r];
            }
        }
        acc.iter().zip(&self.slab_weights).map(|(a, w)| a / w).collect()
    }

    /// `B g`: the slow function `g` as a grid vector.
    pub fn broadcast(&self, g: &[f64]) -> Vec<f64> {
        self.slab_of.iter().map(|s| s.map_or(0.0, |i| g[i])).collect()
    }

    /// `Π f`
    pub fn project(&self, f: &[f64]) -> Vec<f64> {
        self.broadcast(&self.slab_average(f))
    }

    /// Discretize `f(x, y)` with `y` the fast coordinate: cell-center values
    /// on nodal grids, mode coefficients by quadrature on modal grids.
    pub fn sample<F: Fn(f64, f64) -> f64>(&self, f: F) -> Vec<f64> {
        match &self.layout {
            Layout::Nodal { fast_centers, .. } => {
                let mut out = Vec::with_capacity(self.dim());
                for &x in &self.x_centers {
                    for &y in fast_centers {
                        out.push(f(x, y));
                    }
                }
                out
            }
            Layout::Modal { blocks } => {
                let (nodes, qw) = self.fast_quadrature();
                let x_faces = self.interior_faces();
                let mut out = vec![0.0; self.dim()];
                for b in blocks {
                    let xs = if b.on_faces() { &x_faces } else { &self.x_centers };
                    let basis: Vec<f64> = nodes.iter().map(|&y| b.basis(y)).collect();
                    for (n, &x) in xs.iter().enumerate() {
                        out[b.offset + n] = nodes
                            .iter()
                            .zip(&qw)
                            .zip(&basis)
                            .map(|((&y, &w), &e)| w * e * f(x, y))
                            .sum();
                    }
                }
                out
            }
        }
    }

    fn fast_quadrature(&self) -> (Vec<f64>, Vec<f64>) {
        match self.kind {
            GridKind::RTorus => {
                let m = 4 * self.n_fast.max(16);
                let h = std::f64::consts::TAU / m as f64;
                ((0..m).map(|j| j as f64 * h).collect(), vec![1.0 / m as f64; m])
            }
            GridKind::Langevin { .. } => {
                let (m, half) = (4001usize, 14.0);
                let h = 2.0 * half / (m - 1) as f64;
                let norm = (std::f64::consts::TAU).sqrt();
                let nodes: Vec<f64> = (0..m).map(|j| -half + j as f64 * h).collect();
                let w = nodes.iter().map(|y| h * (-0.5 * y * y).exp() / norm).collect();
                (nodes, w)
            }
        }
    }

    pub fn interior_faces(&self) -> Vec<f64> {
        let dx = self.dx();
        (1..self.nx).map(|a| -self.radius + a as f64 * dx).collect()
    }

    /// Momentum reversal `u ↦ u + π` / `v ↦ −v`; conjugates `L` into `L*`.
    pub fn reversal(&self, f: &[f64]) -> Vec<f64> {
        match &self.layout {
            Layout::Nodal { periodic, .. } => {
                let n = self.n_fast;
                let mut out = vec![0.0; f.len()];
                for i in 0..self.nx {
                    for j in 0..n {
                        let jj = if *periodic { (j + n / 2) % n } else { n - 1 - j };
                        out[i * n + jj] = f[i * n + j];
                    }
                }
                out
            }
            Layout::Modal { blocks } => {
                let mut out = f.to_vec();
                for b in blocks.iter().filter(|b| b.k % 2 == 1) {
                    for v in &mut out[b.offset..b.offset + b.len] {
                        *v = -*v;
                    }
                }
                out
            }
        }
    }

    pub fn invariants(&self) -> GridInvariants {
        let sum: f64 = self.mu_vector().into_iter().collect::<CompensatedSum>().value();
        let l1 = self.l.mul_vec(&self.constant);
        let wl = self.l.mul_vec_transposed(&self.mu_vector());
        let mut scale = 0.0_f64;
        let mut asym = 0.0_f64;
        for (r, c, v) in self.t.triplets() {
            if r == c {
                asym = asym.max((self.weights[r] * v).abs());
                continue;
            }
            let a = self.weights[r] * v;
            let b = self.weights[c] * self.t.get(c, r);
            scale = scale.max(a.abs());
            asym = asym.max((a + b).abs());
        }
        let min_offdiag = self
            .l
            .triplets()
            .filter(|(r, c, _)| r != c)
            .fold(0.0_f64, |m, (_, _, v)| m.min(v));
        let total: f64 = self.slab_weights.iter().sum();
        GridInvariants {
            weight_sum_error: (sum - 1.0).abs(),
            conservation_error: max_abs(&l1),
            invariance_error: max_abs(&wl),
            antisymmetry_error: if scale > 0.0 { asym / scale } else { 0.0 },
            min_offdiag,
            boundary_weight: (self.slab_weights[0] + self.slab_weights[self.nx - 1]) / total,
        }
    }

    /// Fails with diagnostics when any structural invariant is violated.
    pub fn validate(&self) -> Result<GridInvariants> {
        let inv = self.invariants();
        let mut bad = Vec::new();
        if !(inv.weight_sum_error <= WEIGHT_SUM_TOL) {
            bad.push(format!("|Σw − 1| = {:.3e}", inv.weight_sum_error));
        }
        if !(inv.conservation_error <= CONSERVATION_TOL) {
            bad.push(format!("max|L·1| = {:.3e}", inv.conservation_error));
        }
        if !(inv.invariance_error <= INVARIANCE_TOL) {
            bad.push(format!("max|wᵀL| = {:.3e}", inv.invariance_error));
        }
        if !(inv.boundary_weight < BOUNDARY_WEIGHT_TOL) {
            bad.push(format!(
                "boundary slab weight {:.3e} ≥ {BOUNDARY_WEIGHT_TOL:e}; increase R",
                inv.boundary_weight
            ));
        }
        if self.discretization == (Discretization::FiniteVolume { scheme: Scheme::Upwind }) && inv.min_offdiag < 0.0 {
            bad.push(format!("negative off-diagonal rate {:.3e}", inv.min_offdiag));
        }
        if bad.is_empty() {
            Ok(inv)
        } else {
            Err(Error::build(format!(
                "grid {}×{} on [−{}, {}]: {}",
                self.nx,
                self.n_fast,
                self.radius,
                self.radius,
                bad.join("; ")
            )))
        }
    }

    /// Matrices in `row col value` lines and the weights, one per line.
    pub fn export_coo(&self) -> (String, String, String, String) {
        fn coo(m: &CsrMatrix) -> String {
            let mut s = format!("% {} {} {}\n", m.nrows(), m.ncols(), m.nnz());
            for (r, c, v) in m.triplets() {
                s.push_str(&format!("{r} {c} {v:.17e}\n"));
            }
            s
        }
        let w = self.weights.iter().map(|w| format!("{w:.17e}\n")).collect();
        (coo(&self.l), coo(&self.t), coo(&self.q), w)
    }
}
