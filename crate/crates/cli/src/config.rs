//! Experiment configuration files.
//!
//! A config is TOML with top-level run keys, an optional `[process]` table
//! and an `[experiment]` table whose `kind` selects the parameter set.
//! Relative paths inside a config resolve against the config's directory.

use std::path::{Path, PathBuf};

use hypocoercivity::bounds::NormConvention;
use hypocoercivity::montecarlo::Region;
use hypocoercivity::processes::{Observable, PolynomialPotential, ProcessKind, ProcessSpec};
use hypocoercivity::spectral::{Discretization, Scheme};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Mandatory; nothing is seeded from the clock.
    pub seed: u64,
    /// Size of the worker pool; defaults to the available parallelism.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// JSON report path; stdout when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Optional CSV dump of the raw data of the experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default = "ProcessSpec::rtorus")]
    pub process: ProcessSpec,
    pub experiment: Experiment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    BoundEval(BoundEvalParams),
    Deviation(DeviationParams),
    Hitting(HittingParams),
    Growth(GrowthParams),
    SpectralRho(SpectralRhoParams),
    Decay(DecayParams),
    Dirichlet(DirichletParams),
    Hormander(HormanderParams),
    LangevinConditions(LangevinParams),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::BoundEval(_) => "bound-eval",
            Experiment::Deviation(_) => "deviation",
            Experiment::Hitting(_) => "hitting",
            Experiment::Growth(_) => "growth",
            Experiment::SpectralRho(_) => "spectral-rho",
            Experiment::Decay(_) => "decay",
            Experiment::Dirichlet(_) => "dirichlet",
            Experiment::Hormander(_) => "hormander",
            Experiment::LangevinConditions(_) => "langevin-conditions",
        }
    }
}

pub const KINDS: [&str; 9] = [
    "bound-eval",
    "deviation",
    "hitting",
    "growth",
    "spectral-rho",
    "decay",
    "dirichlet",
    "hormander",
    "langevin-conditions",
];

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn dt_default() -> f64 {
    0.01
}
fn level_default() -> f64 {
    0.999
}
fn t_cap_factor_default() -> f64 {
    50.0
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridScheme {
    Modal,
    Upwind,
    Centered,
}

impl GridScheme {
    pub fn discretization(self) -> Discretization {
        match self {
            GridScheme::Modal => Discretization::Modal,
            GridScheme::Upwind => Discretization::FiniteVolume { scheme: Scheme::Upwind },
            GridScheme::Centered => Discretization::FiniteVolume {
                scheme: Scheme::Centered,
            },
        }
    }
}

/// A generator grid of `nx × n_fast` on `[−radius, radius]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub n_fast: usize,
    pub radius: f64,
    pub scheme: GridScheme,
}

impl GridConfig {
    pub fn doubled(self) -> Self {
        Self {
            nx: 2 * self.nx,
            n_fast: 2 * self.n_fast,
            ..self
        }
    }
}

/// Where `ρ` comes from: a literal, a file written by `spectral-rho`, or a
/// grid on which it is computed at `ε = 0.5`. Exactly one must be set.
#[derive(Debug, Clone, PartialEq)]
pub enum RhoSource {
    Literal(f64),
    File(PathBuf),
    Grid(GridConfig),
}

fn rho_source(rho: Option<f64>, file: &Option<PathBuf>, grid: &Option<GridConfig>) -> Result<RhoSource, String> {
    match (rho, file, grid) {
        (Some(r), None, None) => {
            if r > 0.0 && r.is_finite() {
                Ok(RhoSource::Literal(r))
            } else {
                Err(format!("rho must be positive and finite, got {r}"))
            }
        }
        (None, Some(f), None) => Ok(RhoSource::File(f.clone())),
        (None, None, Some(g)) => Ok(RhoSource::Grid(*g)),
        _ => Err("exactly one of rho, rho_file, rho_grid must be set".into()),
    }
}

/// `{lo ≤ x ≤ hi}` in the first coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn region(self) -> Region {
        Region::Band {
            coord: 0,
            lo: self.lo,
            hi: self.hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundEvalParams {
    pub rho: f64,
    pub v_l2: f64,
    pub v_inf: f64,
    #[serde(default = "one")]
    pub density_norm: f64,
    pub r: Vec<f64>,
    /// Times at which the deviation bound is evaluated.
    #[serde(default)]
    pub t: Vec<f64>,
    /// `μ(U)` for the hitting-time bound, with `θ` values in `theta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_u: Option<f64>,
    #[serde(default)]
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviationParams {
    pub observable: Observable,
    /// Whether `‖V‖₂, ‖V‖∞` are taken of `V` or of `V − μV`.
    #[serde(default)]
    pub norms: NormConvention,
    pub t: f64,
    pub r: Vec<f64>,
    pub n_traj: usize,
    #[serde(default = "dt_default")]
    pub dt: f64,
    #[serde(default = "level_default")]
    pub level: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_grid: Option<GridConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HittingParams {
    pub target: Band,
    pub theta_fractions: Vec<f64>,
    pub n_traj: usize,
    #[serde(default = "dt_default")]
    pub dt: f64,
    /// Censoring time as a multiple of `1/h(μ(U))`.
    #[serde(default = "t_cap_factor_default")]
    pub t_cap_factor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_grid: Option<GridConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthParams {
    pub target: Band,
    #[serde(default = "half")]
    pub theta_fraction: f64,
    pub x_points: Vec<f64>,
    pub n_traj: usize,
    #[serde(default = "dt_default")]
    pub dt: f64,
    #[serde(default = "t_cap_factor_default")]
    pub t_cap_factor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_grid: Option<GridConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralRhoParams {
    pub grid: GridConfig,
    #[serde(default = "half")]
    pub epsilon: f64,
    /// Repeat on the doubled grid and require a relative change ≤ 5%.
    #[serde(default)]
    pub refine: bool,
    /// Certificate with `S = 0`, required to be ≤ 1e−3.
    #[serde(default = "yes")]
    pub negative_control: bool,
    /// Random vectors for the norm-equivalence check.
    #[serde(default = "norm_checks_default")]
    pub norm_checks: usize,
    /// Where to write the ρ file consumed by other experiments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_out: Option<PathBuf>,
}

fn norm_checks_default() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayParams {
    pub grid: GridConfig,
    #[serde(default = "half")]
    pub epsilon: f64,
    pub t: Vec<f64>,
    pub n_random: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirichletParams {
    pub target: Band,
    #[serde(default = "half")]
    pub theta_fraction: f64,
    /// Coarse grid; the fine grid doubles both sizes. Must be upwind.
    pub grid: GridConfig,
    pub probes: Vec<f64>,
    pub n_traj: usize,
    #[serde(default = "dt_default")]
    pub dt: f64,
    #[serde(default = "t_cap_factor_default")]
    pub t_cap_factor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_grid: Option<GridConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HormanderParams {
    pub x_max: f64,
    pub nx: usize,
    pub nu: usize,
    #[serde(default = "half")]
    pub alpha: f64,
    /// Weights of `(Y₁, Z₂, Z₃)`; default `(‖V′‖∞² + ½, 1, 1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LangevinParams {
    pub half_width: f64,
    pub points: usize,
    pub ball_radius: f64,
    /// Expected verdict; `fail` turns the experiment into a negative control.
    #[serde(default = "expect_pass")]
    pub expect: Expectation,
}

fn expect_pass() -> Expectation {
    Expectation::Pass
}

fn positive(name: &str, v: f64) -> Result<(), String> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(format!("{name} must be positive and finite, got {v}"))
    }
}

fn fractions(name: &str, v: &[f64]) -> Result<(), String> {
    if v.is_empty() {
        return Err(format!("{name} must be nonempty"));
    }
    match v.iter().find(|f| !(**f > 0.0 && **f < 1.0)) {
        Some(f) => Err(format!("{name} entries must lie in (0, 1), got {f}")),
        None => Ok(()),
    }
}

fn grid_ok(g: &GridConfig) -> Result<(), String> {
    positive("grid.radius", g.radius)?;
    if g.nx < 16 || g.n_fast < 16 {
        return Err(format!("grid sizes must be at least 16, got {}×{}", g.nx, g.n_fast));
    }
    Ok(())
}

fn band_ok(b: &Band) -> Result<(), String> {
    if b.lo < b.hi {
        Ok(())
    } else {
        Err(format!("target needs lo < hi, got [{}, {}]", b.lo, b.hi))
    }
}

fn rtorus_only(process: &ProcessSpec, kind: &str) -> Result<(), String> {
    match process.kind() {
        ProcessKind::RTorus => Ok(()),
        _ => Err(format!("{kind} is defined for the r_torus process")),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate().map_err(CliError::Config)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        cfg.rebase(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    /// Makes the relative paths of the config absolute against `base`.
    pub fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(q) = p.as_mut() {
                if q.is_relative() {
                    *q = base.join(&*q);
                }
            }
        };
        fix(&mut self.out);
        fix(&mut self.csv);
        match &mut self.experiment {
            Experiment::Deviation(p) => fix(&mut p.rho_file),
            Experiment::Hitting(p) => fix(&mut p.rho_file),
            Experiment::Growth(p) => fix(&mut p.rho_file),
            Experiment::Dirichlet(p) => fix(&mut p.rho_file),
            Experiment::SpectralRho(p) => fix(&mut p.rho_out),
            _ => {}
        }
    }

    /// `ρ` source of experiments that consume one.
    pub fn rho_source(&self) -> Option<Result<RhoSource, String>> {
        Some(match &self.experiment {
            Experiment::Deviation(p) => rho_source(p.rho, &p.rho_file, &p.rho_grid),
            Experiment::Hitting(p) => rho_source(p.rho, &p.rho_file, &p.rho_grid),
            Experiment::Growth(p) => rho_source(p.rho, &p.rho_file, &p.rho_grid),
            Experiment::Dirichlet(p) => rho_source(p.rho, &p.rho_file, &p.rho_grid),
            _ => return None,
        })
    }

    /// Range checks that do not need any computation.
    pub fn validate(&self) -> Result<(), String> {
        if self.workers == Some(0) {
            return Err("workers must be positive".into());
        }
        if let Some(Err(e)) = self.rho_source() {
            return Err(e);
        }
        if let Some(Ok(RhoSource::Grid(g))) = self.rho_source() {
            grid_ok(&g)?;
        }
        match &self.experiment {
            Experiment::BoundEval(p) => {
                positive("rho", p.rho)?;
                if p.r.is_empty() {
                    return Err("r must be nonempty".into());
                }
                if !p.theta.is_empty() && p.mu_u.is_none() {
                    return Err("theta needs mu_u".into());
                }
            }
            Experiment::Deviation(p) => {
                positive("t", p.t)?;
                positive("dt", p.dt)?;
                if p.n_traj < 100 {
                    return Err(format!("n_traj must be at least 100, got {}", p.n_traj));
                }
                if p.r.is_empty() {
                    return Err("r must be nonempty".into());
                }
                if p.observable.sup_norm().is_none() {
                    return Err("the observable must be bounded".into());
                }
                if !(p.level > 0.0 && p.level < 1.0) {
                    return Err(format!("level must lie in (0, 1), got {}", p.level));
                }
            }
            Experiment::Hitting(p) => {
                band_ok(&p.target)?;
                fractions("theta_fractions", &p.theta_fractions)?;
                positive("dt", p.dt)?;
                positive("t_cap_factor", p.t_cap_factor)?;
                if p.n_traj < 2 {
                    return Err("n_traj must be at least 2".into());
                }
            }
            Experiment::Growth(p) => {
                rtorus_only(&self.process, "growth")?;
                band_ok(&p.target)?;
                fractions("theta_fraction", &[p.theta_fraction])?;
                positive("dt", p.dt)?;
                positive("t_cap_factor", p.t_cap_factor)?;
                if p.x_points.is_empty() || p.n_traj < 2 {
                    return Err("x_points must be nonempty and n_traj at least 2".into());
                }
            }
            Experiment::SpectralRho(p) => {
                grid_ok(&p.grid)?;
                if !(p.epsilon > 0.0 && p.epsilon < 1.0) {
                    return Err(format!("epsilon must lie in (0, 1), got {}", p.epsilon));
                }
            }
            Experiment::Decay(p) => {
                grid_ok(&p.grid)?;
                if !(p.epsilon > 0.0 && p.epsilon < 1.0) {
                    return Err(format!("epsilon must lie in (0, 1), got {}", p.epsilon));
                }
                if p.t.is_empty() || p.t.iter().any(|t| !(*t >= 0.0)) || p.n_random == 0 {
                    return Err("t must be nonempty and nonnegative, n_random positive".into());
                }
            }
            Experiment::Dirichlet(p) => {
                rtorus_only(&self.process, "dirichlet")?;
                band_ok(&p.target)?;
                grid_ok(&p.grid)?;
                if p.grid.scheme != GridScheme::Upwind {
                    return Err("the dirichlet grid must use scheme = \"upwind\"".into());
                }
                fractions("theta_fraction", &[p.theta_fraction])?;
                positive("dt", p.dt)?;
                if p.probes.is_empty() || p.n_traj < 2 {
                    return Err("probes must be nonempty and n_traj at least 2".into());
                }
            }
            Experiment::Hormander(p) => {
                positive("x_max", p.x_max)?;
                if p.nx < 2 || p.nu == 0 {
                    return Err("need nx ≥ 2 and nu ≥ 1".into());
                }
                if let Some(w) = p.weights {
                    if w.iter().any(|a| !(*a > 0.0)) {
                        return Err("weights must be positive".into());
                    }
                }
            }
            Experiment::LangevinConditions(p) => {
                positive("half_width", p.half_width)?;
                if !matches!(self.process.kind(), ProcessKind::KineticLangevin { .. }) {
                    return Err("langevin-conditions needs a kinetic_langevin process".into());
                }
                if p.points < 3 {
                    return Err("points must be at least 3".into());
                }
            }
        }
        Ok(())
    }

    /// The config as embedded in reports: everything except the run-time
    /// settings that do not affect results.
    pub fn resolved(&self) -> serde_json::Value {
        let mut c = self.clone();
        c.workers = None;
        c.out = None;
        c.csv = None;
        let mut v = serde_json::to_value(&c).expect("config serializes");
        // Paths are machine-specific; keep only file names.
        strip_dirs(&mut v);
        v
    }
}

fn strip_dirs(v: &mut serde_json::Value) {
    if let serde_json::Value::Object(m) = v {
        for (k, x) in m.iter_mut() {
            if k == "rho_file" || k == "rho_out" {
                if let Some(s) = x.as_str() {
                    let name = Path::new(s)
                        .file_name()
                        .map(|n| n.to_string_lossy().into_owned())
                        .unwrap_or_default();
                    *x = serde_json::Value::String(name);
                }
            } else {
                strip_dirs(x);
            }
        }
    }
}

/// The polynomial potential of a 1-d Langevin process.
pub fn langevin_potential(process: &ProcessSpec) -> Option<&PolynomialPotential> {
    match process.kind() {
        ProcessKind::KineticLangevin { potential } => Some(potential),
        _ => None,
    }
}
