//! Exact samplers and quadrature for the product-form invariant measures.
//!
//! * Langevin: `∝ e^{−U(x)−|v|²/2}` with separable `U`, so every `x`
//!   coordinate has marginal `∝ e^{−p(y)}` and every `v` is standard normal.
//! * Self-interacting: `∝ exp(−½ Σ a_j|λ_j| u_j²)`, uniform in `x`.
//! * ℝ×𝕋: `∝ e^{−V(x)}`, uniform in `u`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use super::potential::rtorus_v;
use super::spec::{ProcessKind, ProcessSpec};
use crate::quadrature::integrate;
use crate::{Error, Result};

/// Number of CDF nodes of a tabulated Gibbs marginal.
pub const TABLE_NODES: usize = (1 << 14) + 1;

/// Allowed probability mass outside the truncation window.
pub const TAIL_MASS: f64 = 1e-8;

// Width of the window over which the neglected tail is integrated.
const TAIL_WINDOW: f64 = 64.0;
const MAX_TRUNCATION: f64 = 1e4;

type LogDensity = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// One-dimensional density `∝ e^{−φ(y)}` truncated to `[−R, R]`, with an
/// inverse-CDF table.
#[derive(Clone)]
pub struct GibbsMarginal {
    phi: LogDensity,
    shift: f64,
    radius: f64,
    nodes: Vec<f64>,
    cdf: Vec<f64>,
    mass: f64,
}

impl fmt::Debug for GibbsMarginal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GibbsMarginal")
            .field("radius", &self.radius)
            .field("normalization", &self.normalization())
            .finish()
    }
}

impl GibbsMarginal {
    pub fn new(phi: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let phi: LogDensity = Arc::new(phi);
        // Shift φ by its minimum so e^{−(φ−shift)} ≤ 1 near the mode.
        let shift = (-4096..=4096)
            .map(|i| phi(i as f64 / 64.0))
            .fold(f64::INFINITY, f64::min);
        if !shift.is_finite() {
            return Err(Error::config("log-density is not finite on [−64, 64]"));
        }
        let density = {
            let phi = phi.clone();
            move |y: f64| (-(phi(y) - shift)).exp()
        };
        let mut radius = 4.0;
        loop {
            let inner = integrate(&density, -radius, radius, 1e-14).value;
            let tail = integrate(&density, radius, radius + TAIL_WINDOW, 1e-16).value
                + integrate(&density, -radius - TAIL_WINDOW, -radius, 1e-16).value;
            if !inner.is_finite() || !tail.is_finite() {
                return Err(Error::config("density is not integrable"));
            }
            if tail <= 0.5 * TAIL_MASS * inner {
                break;
            }
            radius *= 1.25;
            if radius > MAX_TRUNCATION {
                return Err(Error::config(format!(
                    "truncation domain too small: tail mass exceeds {TAIL_MASS} even at R = {MAX_TRUNCATION}"
                )));
            }
        }
        let cells = TABLE_NODES - 1;
        let h = 2.0 * radius / cells as f64;
        let nodes: Vec<f64> = (0..TABLE_NODES).map(|i| -radius + h * i as f64).collect();
        let mut cdf = Vec::with_capacity(TABLE_NODES);
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in nodes.windows(2) {
            acc += integrate(&density, w[0], w[1], 1e-17).value;
            cdf.push(acc);
        }
        let mass = acc;
        for c in cdf.iter_mut() {
            *c /= mass;
        }
        Ok(Self {
            phi,
            shift,
            radius,
            nodes,
            cdf,
            mass,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `∫_{−R}^{R} e^{−φ}`.
    pub fn normalization(&self) -> f64 {
        self.mass * (-self.shift).exp()
    }

    pub fn density(&self, y: f64) -> f64 {
        if y.abs() > self.radius {
            return 0.0;
        }
        (-((self.phi)(y) - self.shift)).exp() / self.mass
    }

    /// Inverse CDF, linear within each table cell.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let k = self.cdf.partition_point(|&c| c <= p).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let frac = if c1 > c0 { (p - c0) / (c1 - c0) } else { 0.5 };
        self.nodes[k - 1] + frac * (self.nodes[k] - self.nodes[k - 1])
    }

    pub fn cdf_at(&self, y: f64) -> f64 {
        if y <= -self.radius {
            return 0.0;
        }
        if y >= self.radius {
            return 1.0;
        }
        let h = self.nodes[1] - self.nodes[0];
        let k = (((y + self.radius) / h) as usize).min(self.nodes.len() - 2);
        let frac = (y - self.nodes[k]) / h;
        self.cdf[k] + frac * (self.cdf[k + 1] - self.cdf[k])
    }

    pub fn expect(&self, g: impl Fn(f64) -> f64, breakpoints: &[f64]) -> f64 {
        let f = |y: f64| g(y) * self.density(y);
        integrate_pieces(&f, -self.radius, self.radius, breakpoints)
    }
}

fn integrate_pieces(f: &impl Fn(f64) -> f64, a: f64, b: f64, breakpoints: &[f64]) -> f64 {
    let mut cuts: Vec<f64> = std::iter::once(a)
        .chain(breakpoints.iter().copied().filter(|&c| c > a && c < b))
        .chain(std::iter::once(b))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2).map(|w| integrate(f, w[0], w[1], 1e-13).value).sum()
}

/// Law of one coordinate under the invariant measure.
#[derive(Debug, Clone)]
pub enum Marginal {
    Gibbs(GibbsMarginal),
    Gaussian { variance: f64 },
    UniformAngle,
}

impl Marginal {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Marginal::Gibbs(g) => g.quantile(rng.random::<f64>()),
            Marginal::Gaussian { variance } => {
                let z: f64 = StandardNormal.sample(rng);
                variance.sqrt() * z
            }
            Marginal::UniformAngle => TAU * rng.random::<f64>(),
        }
    }

    /// `E[g(Y)]`; `breakpoints` lists discontinuities of `g`.
    pub fn expect(&self, g: impl Fn(f64) -> f64, breakpoints: &[f64]) -> f64 {
        match self {
            Marginal::Gibbs(m) => m.expect(g, breakpoints),
            Marginal::Gaussian { variance } => {
                let s = variance.sqrt();
                let norm = 1.0 / (s * TAU.sqrt());
                let f = |y: f64| g(y) * norm * (-0.5 * y * y / variance).exp();
                integrate_pieces(&f, -14.0 * s, 14.0 * s, breakpoints)
            }
            Marginal::UniformAngle => {
                let f = |y: f64| g(y) / TAU;
                integrate_pieces(&f, 0.0, TAU, breakpoints)
            }
        }
    }

    pub fn density(&self, y: f64) -> f64 {
        match self {
            Marginal::Gibbs(m) => m.density(y),
            Marginal::Gaussian { variance } => (-0.5 * y * y / variance).exp() / (TAU * variance).sqrt(),
            Marginal::UniformAngle => {
                if (0.0..TAU).contains(&y) {
                    1.0 / TAU
                } else {
                    0.0
                }
            }
        }
    }
}

/// The invariant probability measure of a [`ProcessSpec`], as a product of
/// one-dimensional marginals.
#[derive(Debug, Clone)]
pub struct InvariantMeasure {
    marginals: Vec<Marginal>,
    description: String,
}

impl InvariantMeasure {
    pub fn new(spec: &ProcessSpec) -> Result<Self> {
        match spec.kind() {
            ProcessKind::KineticLangevin { potential } => {
                if !potential.is_confining() {
                    return Err(Error::config(
                        "Langevin potential must be an even-degree polynomial with positive leading coefficient",
                    ));
                }
                let p = potential.clone();
                let gibbs = GibbsMarginal::new(move |y| p.p(y))?;
                let d = potential.dim;
                let mut marginals = vec![Marginal::Gibbs(gibbs); d];
                marginals.extend(std::iter::repeat_n(Marginal::Gaussian { variance: 1.0 }, d));
                Ok(Self {
                    marginals,
                    description: "density ∝ exp(−U(x) − |v|²/2)".into(),
                })
            }
            ProcessKind::SelfInteracting { dim, modes } => {
                let mut marginals = vec![Marginal::UniformAngle; *dim];
                marginals.extend(modes.iter().map(|m| Marginal::Gaussian {
                    variance: m.stationary_variance(),
                }));
                Ok(Self {
                    marginals,
                    description: "density ∝ exp(−½ Σ a_j |λ_j| u_j²), uniform in x".into(),
                })
            }
            ProcessKind::RTorus => {
                let gibbs = GibbsMarginal::new(rtorus_v)?;
                Ok(Self {
                    marginals: vec![Marginal::Gibbs(gibbs), Marginal::UniformAngle],
                    description: "density ∝ exp(−V(x)), uniform in u".into(),
                })
            }
        }
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn marginals(&self) -> &[Marginal] {
        &self.marginals
    }

    pub fn marginal(&self, coord: usize) -> &Marginal {
        &self.marginals[coord]
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for (o, m) in out.iter_mut().zip(&self.marginals) {
            *o = m.sample(rng);
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.marginals.len()];
        self.sample_into(rng, &mut out);
        out
    }

    /// `μ(g)` for `g` depending on coordinate `coord` only.
    pub fn expect_coordinate(&self, coord: usize, g: impl Fn(f64) -> f64, breakpoints: &[f64]) -> f64 {
        self.marginals[coord].expect(g, breakpoints)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn rtorus_marginal_truncation_and_mass() {
        let mu = InvariantMeasure::new(&ProcessSpec::rtorus()).unwrap();
        let Marginal::Gibbs(g) = mu.marginal(0) else { panic!() };
        assert!(g.radius() > 15.0 && g.radius() < 60.0, "{}", g.radius());
        let total = mu.expect_coordinate(0, |_| 1.0, &[]);
        assert!((total - 1.0).abs() < 1e-10);
        let mean = mu.expect_coordinate(0, |y| y, &[]);
        assert!(mean.abs() < 1e-10);
    }

    #[test]
    fn gaussian_expectations() {
        let m = Marginal::Gaussian { variance: 0.25 };
        assert!((m.expect(|y| y * y, &[]) - 0.25).abs() < 1e-12);
        assert!((m.expect(|y| if y > 0.0 { 1.0 } else { 0.0 }, &[0.0]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn quantile_inverts_cdf() {
        let g = GibbsMarginal::new(|y| 0.5 * y * y).unwrap();
        for p in [1e-6, 0.1, 0.5, 0.9, 0.999] {
            let y = g.quantile(p);
            assert!((g.cdf_at(y) - p).abs() < 1e-9, "{p}");
        }
        assert!(g.quantile(0.5).abs() < 1e-9);
    }

    #[test]
    fn sampler_is_deterministic_per_stream() {
        let mu = InvariantMeasure::new(&ProcessSpec::rtorus()).unwrap();
        let a = mu.sample(&mut stream(9, 2));
        let b = mu.sample(&mut stream(9, 2));
        assert_eq!(a, b);
        assert!((0.0..TAU).contains(&a[1]));
    }
}
