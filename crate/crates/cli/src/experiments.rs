//! One runner per experiment kind. Each returns its results, the checked
//! assertions and an optional CSV table; nothing here touches the clock.

use std::fmt::Write as _;
use std::path::Path;

use hypocoercivity::assumptions::{bracket_consistency, hormander_check, langevin_conditions, CubeGrid, FieldFamily};
use hypocoercivity::bounds::{
    self, deviation_bound, h_rate, hitting_bound, hitting_rate, lambda_upper, legendre_rate, BoundInputs, Extended,
    NormConvention,
};
use hypocoercivity::dirichlet::{crossvalidate, solve_dirichlet, theta_warning};
use hypocoercivity::montecarlo::{
    censoring_gate, exp_moment, growth_profile, hitting_times, tail_from_averages, time_averages, TailExperiment,
};
use hypocoercivity::processes::{rtorus_v, Initial, InitialSampler, InvariantMeasure, ProcessKind, ProcessSpec};
use hypocoercivity::spectral::{
    self, build_dms, build_langevin_generator, build_rtorus_generator, certify, decay_check, estimate_rho,
    negative_control, poincare_constants, random_mean_zero, DmsOperators, GridOperator, RhoEstimate, CONSERVATION_TOL,
    H3_TOL, INVARIANCE_TOL, SYMMETRY_TOL, WEIGHT_SUM_TOL,
};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::*;
use crate::report::{Assertion, SCHEMA_VERSION};
use crate::CliError;

/// What a runner produces.
#[derive(Debug, Default)]
pub struct Outcome {
    pub results: Value,
    pub assertions: Vec<Assertion>,
    pub warnings: Vec<String>,
    pub csv: Option<String>,
}

/// The file written by `spectral-rho` and read through `rho_file`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoFile {
    pub schema_version: String,
    pub process: ProcessSpec,
    /// The value consumers use: the smaller of the base and refined
    /// estimates when a refinement was run.
    pub rho: f64,
    pub estimate: RhoEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refined: Option<RhoEstimate>,
}

impl RhoFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("rho_file {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("rho_file {}: {e}", path.display())))
    }
}

/// Certificate tolerance of the negative control.
pub const NEGATIVE_CONTROL_LIMIT: f64 = 1e-3;
/// Allowed relative change of `ρ` under grid doubling.
pub const RHO_STABILITY: f64 = 0.05;
/// Allowed relative change of `W` at the probes under grid doubling.
pub const REFINEMENT_LIMIT: f64 = 0.02;
/// Residual gate of the boundary problem.
pub const DIRICHLET_RESIDUAL: f64 = 1e-6;
/// Relative agreement of floating and exact rates.
pub const EXACT_REL_TOL: f64 = 1e-12;

pub fn build_grid(process: &ProcessSpec, grid: &GridConfig) -> Result<GridOperator, CliError> {
    let disc = grid.scheme.discretization();
    Ok(match process.kind() {
        ProcessKind::RTorus => build_rtorus_generator(grid.nx, grid.n_fast, grid.radius, disc)?,
        ProcessKind::KineticLangevin { potential } => {
            build_langevin_generator(grid.nx, grid.n_fast, grid.radius, potential, disc)?
        }
        ProcessKind::SelfInteracting { .. } => {
            return Err(CliError::Config(
                "grids exist for r_torus and 1-d kinetic_langevin processes".into(),
            ))
        }
    })
}

/// `ρ` at `ε = ½` on a grid.
pub fn rho_on_grid(process: &ProcessSpec, grid: &GridConfig) -> Result<RhoEstimate, CliError> {
    let g = build_grid(process, grid)?;
    let d = build_dms(&g, 0.5)?;
    Ok(estimate_rho(&g, &d)?)
}

fn resolve_rho(cfg: &ExperimentConfig) -> Result<(f64, Value), CliError> {
    let source = cfg
        .rho_source()
        .expect("experiment consumes ρ")
        .map_err(CliError::Config)?;
    match source {
        RhoSource::Literal(r) => Ok((r, json!({ "source": "literal", "rho": r }))),
        RhoSource::File(path) => {
            let f = RhoFile::read(&path)?;
            if f.process != cfg.process {
                return Err(CliError::Config(format!(
                    "rho_file {} was computed for a different process",
                    path.display()
                )));
            }
            Ok((f.rho, json!({ "source": "file", "rho": f.rho, "estimate": f.estimate })))
        }
        RhoSource::Grid(g) => {
            let est = rho_on_grid(&cfg.process, &g)?;
            Ok((est.rho, json!({ "source": "grid", "rho": est.rho, "estimate": est })))
        }
    }
}

fn ext(e: Extended) -> Value {
    match e {
        Extended::Finite(x) => json!(x),
        Extended::Infinite => json!("inf"),
    }
}

fn rational(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

pub fn bound_eval(p: &BoundEvalParams) -> Result<Outcome, CliError> {
    let inputs = BoundInputs::new(p.rho, p.v_l2, p.v_inf, p.density_norm)?;
    let mut out = Outcome::default();
    let q = (rational(p.rho), rational(inputs.v_l2()), rational(inputs.v_inf()));
    let mut rows = Vec::new();
    for &r in &p.r {
        let h = h_rate(r, &inputs)?;
        let exact = match (&q, rational(r)) {
            ((Some(rho), Some(l2), Some(inf)), Some(rq)) => bounds::exact::h_rate(&rq, rho, &(l2 * l2), inf),
            _ => None,
        };
        if let Some(e) = &exact {
            let ef = e.to_f64().unwrap_or(f64::NAN);
            let rel = if ef == 0.0 { h.abs() } else { ((h - ef) / ef).abs() };
            out.assertions
                .push(Assertion::at_most(format!("h_exact r={r}"), rel, EXACT_REL_TOL));
        }
        let legendre = match inputs.lambda0() {
            Extended::Finite(l0) if r > 0.0 => Some(legendre_rate(r, l0, inputs.beta())?),
            _ => None,
        };
        if let Some(l) = legendre {
            out.assertions.push(Assertion::at_least(
                format!("legendre_dominates r={r}"),
                l,
                h * (1.0 - EXACT_REL_TOL),
            ));
        }
        let dev: Vec<Value> =
            p.t.iter()
                .map(|&t| Ok(json!({ "t": t, "bound": deviation_bound(t, r, &inputs)? })))
                .collect::<Result<_, CliError>>()?;
        rows.push(json!({
            "r": r,
            "h": h,
            "h_exact": exact.map(|e| e.to_string()),
            "legendre": legendre,
            "deviation_bounds": dev,
        }));
    }
    let mut hitting = Value::Null;
    if let Some(mu_u) = p.mu_u {
        let h = hitting_rate(mu_u, p.rho)?;
        let rows: Vec<Value> = p
            .theta
            .iter()
            .map(|&theta| match hitting_bound(theta, mu_u, &inputs) {
                Ok(b) => json!({ "theta": theta, "bound": b }),
                Err(e) => json!({ "theta": theta, "bound": null, "error": e.to_string() }),
            })
            .collect();
        hitting = json!({ "mu_u": mu_u, "h_mu_u": h, "bounds": rows });
    }
    out.results = json!({
        "inputs": inputs,
        "lambda0": ext(inputs.lambda0()),
        "beta": inputs.beta(),
        "lambda_upper": ext(lambda_upper(&inputs)),
        "rates": rows,
        "hitting": hitting,
    });
    Ok(out)
}

pub fn deviation(cfg: &ExperimentConfig, p: &DeviationParams) -> Result<Outcome, CliError> {
    let (rho, rho_info) = resolve_rho(cfg)?;
    let mu = InvariantMeasure::new(&cfg.process)?;
    let mean = p.observable.mean(&mu);
    let l2 = p.observable.l2_norm(&mu);
    let sup = p.observable.sup_norm().expect("validated bounded");
    let (v_l2, v_inf) = match p.norms {
        NormConvention::Uncentered => (l2, sup),
        NormConvention::Centered => ((l2 * l2 - mean * mean).max(0.0).sqrt(), sup + mean.abs()),
    };
    let inputs = BoundInputs::new(rho, v_l2, v_inf, 1.0)?;
    let sampler = InitialSampler::with_measure(&cfg.process, &Initial::Invariant, &mu)?;
    let exp = TailExperiment {
        spec: &cfg.process,
        sampler: &sampler,
        observable: &p.observable,
        t: p.t,
        dt: p.dt,
        n_traj: p.n_traj,
        seed: cfg.seed,
    };
    let averages = time_averages(&exp)?;
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for &r in &p.r {
        let est = tail_from_averages(&averages, mean, r, p.level)?;
        let h = h_rate(r.max(0.0), &inputs)?;
        let bound = deviation_bound(p.t, r.max(0.0), &inputs)?;
        out.assertions
            .push(Assertion::at_most(format!("tail_bound r={r}"), est.ci_upper, bound));
        rows.push(json!({ "estimate": est, "h": h, "bound": bound }));
    }
    let mut csv = String::from("index,time_average\n");
    for (i, a) in averages.iter().enumerate() {
        writeln!(csv, "{i},{a:e}").unwrap();
    }
    out.csv = Some(csv);
    out.results = json!({
        "rho": rho_info,
        "mu_v": mean,
        "norms": p.norms,
        "v_l2": inputs.v_l2(),
        "v_inf": inputs.v_inf(),
        "t": p.t,
        "rows": rows,
    });
    Ok(out)
}

pub fn hitting(cfg: &ExperimentConfig, p: &HittingParams) -> Result<Outcome, CliError> {
    let (rho, rho_info) = resolve_rho(cfg)?;
    let mu = InvariantMeasure::new(&cfg.process)?;
    let region = p.target.region();
    let mu_u = region.measure(&mu);
    let h = hitting_rate(mu_u, rho)?;
    let t_cap = p.t_cap_factor / h;
    let samples = hitting_times(
        &cfg.process,
        &region,
        &mu,
        &Initial::Invariant,
        p.n_traj,
        t_cap,
        p.dt,
        cfg.seed,
    )?;
    let inputs = BoundInputs::for_indicator(rho, mu_u, 1.0)?;
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for &f in &p.theta_fractions {
        let theta = f * h;
        let est = exp_moment(&samples, theta)?;
        let bound = hitting_bound(theta, mu_u, &inputs)?;
        let gate = censoring_gate(&est, t_cap, bound);
        out.assertions
            .push(Assertion::holds(format!("censoring_gate fraction={f}"), gate, || {
                format!("censored fraction {} at t_cap = {t_cap}", est.censored_fraction)
            }));
        out.assertions.push(Assertion::at_most(
            format!("moment_bound fraction={f}"),
            est.mean + 3.0 * est.std_error,
            bound,
        ));
        rows.push(json!({ "fraction": f, "estimate": est, "bound": bound, "censoring_gate": gate }));
    }
    let hits: Vec<f64> = samples.iter().filter_map(|s| s.hit_time).collect();
    let mean_hit = hits.iter().sum::<f64>() / hits.len().max(1) as f64;
    let mut csv = String::from("index,hit_time,censored\n");
    for (i, s) in samples.iter().enumerate() {
        writeln!(csv, "{i},{},{}", s.surrogate(), s.is_censored()).unwrap();
    }
    out.csv = Some(csv);
    out.results = json!({
        "rho": rho_info,
        "mu_u": mu_u,
        "h_mu_u": h,
        "t_cap": t_cap,
        "n_traj": p.n_traj,
        "censored": samples.len() - hits.len(),
        "mean_hit_time_uncensored": mean_hit,
        "rows": rows,
    });
    Ok(out)
}

pub fn growth(cfg: &ExperimentConfig, p: &GrowthParams) -> Result<Outcome, CliError> {
    let (rho, rho_info) = resolve_rho(cfg)?;
    let mu = InvariantMeasure::new(&cfg.process)?;
    let region = p.target.region();
    let mu_u = region.measure(&mu);
    let h = hitting_rate(mu_u, rho)?;
    let theta = p.theta_fraction * h;
    let t_cap = p.t_cap_factor / h;
    let points = growth_profile(
        &cfg.process,
        &region,
        &mu,
        theta,
        &p.x_points,
        p.n_traj,
        t_cap,
        p.dt,
        cfg.seed,
    )?;
    let mut out = Outcome::default();
    let ratio_se = |k: usize| points[k].std_error / (0.5 * rtorus_v(points[k].x)).exp();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].x.abs().total_cmp(&points[b].x.abs()));
    let mut worst_rise = f64::NEG_INFINITY;
    let mut worst_drop = f64::NEG_INFINITY;
    for w in order.windows(2) {
        let (a, b) = (w[0], w[1]);
        let allowance = 3.0 * (ratio_se(a).powi(2) + ratio_se(b).powi(2)).sqrt();
        worst_rise = worst_rise.max(points[b].ratio - points[a].ratio - allowance);
        let inside = region.contains(&[points[a].x, 0.0]);
        if !inside {
            let se = 3.0 * (points[a].std_error.powi(2) + points[b].std_error.powi(2)).sqrt();
            worst_drop = worst_drop.max(points[a].w_hat - points[b].w_hat - se);
        }
    }
    let max_ratio = points.iter().map(|q| q.ratio).fold(f64::NEG_INFINITY, f64::max);
    out.assertions
        .push(Assertion::holds("max_ratio_finite", max_ratio.is_finite(), || {
            format!("max ratio {max_ratio}")
        }));
    if points.len() > 1 {
        out.assertions
            .push(Assertion::at_most("no_upward_trend", worst_rise, 0.0));
    }
    if worst_drop > 0.0 {
        out.warnings
            .push(format!("Ŵ decreases in |x| outside U by {worst_drop:e} beyond 3SE"));
    }
    let mut csv = String::from("x,w_hat,std_error,ratio\n");
    for q in &points {
        writeln!(csv, "{},{:e},{:e},{:e}", q.x, q.w_hat, q.std_error, q.ratio).unwrap();
    }
    out.csv = Some(csv);
    out.results = json!({
        "rho": rho_info,
        "mu_u": mu_u,
        "h_mu_u": h,
        "theta": theta,
        "t_cap": t_cap,
        "points": points,
        "max_ratio": max_ratio,
    });
    Ok(out)
}

fn dms_assertions(out: &mut Outcome, g: &GridOperator, d: &DmsOperators, seed: u64, norm_checks: usize) -> Value {
    let rep = d.check(g, seed);
    out.assertions
        .push(Assertion::at_most("s_symmetry", rep.s_symmetry_error, SYMMETRY_TOL));
    out.assertions
        .push(Assertion::at_most("s_norm", rep.s_norm, spectral::S_NORM_LIMIT));
    out.assertions.push(Assertion::at_most("pi_t_pi", rep.h3_error, H3_TOL));
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..norm_checks as u64 {
        let f = random_mean_zero(g, seed ^ 0x5eed, i);
        let q = d.b_norm_sq(&f) / g.inner(&f, &f);
        lo = lo.min(q);
        hi = hi.max(q);
    }
    if norm_checks > 0 {
        out.assertions.push(Assertion::at_least("b_norm_lower", lo, 0.5));
        out.assertions.push(Assertion::at_most("b_norm_upper", hi, 1.5));
    }
    json!({ "report": rep, "b_norm_ratio_min": lo, "b_norm_ratio_max": hi, "norm_checks": norm_checks })
}

fn grid_assertions(out: &mut Outcome, g: &GridOperator) -> Value {
    let inv = g.invariants();
    out.assertions
        .push(Assertion::at_most("weight_sum", inv.weight_sum_error, WEIGHT_SUM_TOL));
    out.assertions
        .push(Assertion::at_most("l_one", inv.conservation_error, CONSERVATION_TOL));
    out.assertions
        .push(Assertion::at_most("w_l", inv.invariance_error, INVARIANCE_TOL));
    json!(inv)
}

fn certified(
    out: &mut Outcome,
    g: &GridOperator,
    d: &DmsOperators,
    grid: &GridConfig,
    seed: u64,
    tag: &str,
) -> RhoEstimate {
    let c = certify(g, Some(d), seed);
    out.assertions.push(Assertion::holds(
        format!("certificate_converged{tag}"),
        c.converged,
        || format!("residual {:e} after {} iterations", c.residual, c.iterations),
    ));
    out.assertions.push(Assertion::at_least(
        format!("rho_positive{tag}"),
        c.value,
        f64::MIN_POSITIVE,
    ));
    RhoEstimate {
        rho: c.value,
        epsilon_used: d.epsilon(),
        certificate: c.value,
        residual: c.residual,
        iterations: c.iterations,
        nx: grid.nx,
        n_fast: grid.n_fast,
        radius: grid.radius,
        discretization: grid.scheme.discretization(),
    }
}

pub fn spectral_rho(cfg: &ExperimentConfig, p: &SpectralRhoParams) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let g = build_grid(&cfg.process, &p.grid)?;
    let invariants = grid_assertions(&mut out, &g);
    let d = DmsOperators::new(&g, p.epsilon)?;
    let dms = dms_assertions(&mut out, &g, &d, cfg.seed, p.norm_checks);
    let est = certified(&mut out, &g, &d, &p.grid, cfg.seed, "");
    let constants = poincare_constants(&g)?;
    let negative = p.negative_control.then(|| {
        let c = negative_control(&g);
        out.assertions
            .push(Assertion::at_most("negative_control", c.value, NEGATIVE_CONTROL_LIMIT));
        c.value
    });
    let refined = if p.refine {
        let fine = p.grid.doubled();
        let gf = build_grid(&cfg.process, &fine)?;
        let df = DmsOperators::new(&gf, p.epsilon)?;
        let ef = certified(&mut out, &gf, &df, &fine, cfg.seed, " refined");
        let change = ((ef.rho - est.rho) / est.rho).abs();
        out.assertions
            .push(Assertion::at_most("rho_stability", change, RHO_STABILITY));
        Some(ef)
    } else {
        None
    };
    let rho = refined.as_ref().map_or(est.rho, |f| f.rho.min(est.rho));
    if let Some(path) = &p.rho_out {
        let file = RhoFile {
            schema_version: SCHEMA_VERSION.into(),
            process: cfg.process.clone(),
            rho,
            estimate: est.clone(),
            refined: refined.clone(),
        };
        write_file(path, &(serde_json::to_string_pretty(&file).expect("serializes") + "\n"))?;
    }
    out.results = json!({
        "rho": rho,
        "estimate": est,
        "refined": refined,
        "negative_control": negative,
        "invariants": invariants,
        "dms": dms,
        "poincare": constants,
    });
    Ok(out)
}

pub fn decay(cfg: &ExperimentConfig, p: &DecayParams) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let g = build_grid(&cfg.process, &p.grid)?;
    let d = build_dms(&g, p.epsilon)?;
    let r = estimate_rho(&g, &d)?;
    let rep = decay_check(&g, &d, &r, &p.t, p.n_random, cfg.seed)?;
    for pt in &rep.points {
        out.assertions.push(Assertion::at_most(
            format!("envelope t={}", pt.t),
            pt.envelope_ratio,
            1.0 + spectral::DECAY_REL_TOL,
        ));
    }
    out.assertions.push(Assertion::holds("decay_check", rep.passed, || {
        format!("first violation {:?}", rep.witness)
    }));
    let mut csv = String::from("t,envelope_ratio,b_norm_ratio,dissipation_excess\n");
    for pt in &rep.points {
        writeln!(
            csv,
            "{},{:e},{:e},{:e}",
            pt.t, pt.envelope_ratio, pt.b_norm_ratio, pt.dissipation_excess
        )
        .unwrap();
    }
    out.csv = Some(csv);
    out.results = json!({ "estimate": r, "decay": rep });
    Ok(out)
}

pub fn dirichlet(cfg: &ExperimentConfig, p: &DirichletParams) -> Result<Outcome, CliError> {
    let (rho, rho_info) = resolve_rho(cfg)?;
    let mu = InvariantMeasure::new(&cfg.process)?;
    let region = p.target.region();
    let mu_u = region.measure(&mu);
    let h = hitting_rate(mu_u, rho)?;
    let theta = p.theta_fraction * h;
    let mut out = Outcome::default();
    out.warnings.extend(theta_warning(theta, h));

    let coarse = build_grid(&cfg.process, &p.grid)?;
    let fine = build_grid(&cfg.process, &p.grid.doubled())?;
    let zero = solve_dirichlet(&coarse, &region, 0.0)?;
    out.assertions.push(Assertion::holds(
        "theta_zero_gives_one",
        zero.w.iter().all(|&w| w == 1.0),
        || format!("min W {} at θ = 0", zero.min_w),
    ));
    let sc = solve_dirichlet(&coarse, &region, theta)?;
    let sf = solve_dirichlet(&fine, &region, theta)?;
    for (tag, s) in [("coarse", &sc), ("fine", &sf)] {
        out.assertions.push(Assertion::at_most(
            format!("residual {tag}"),
            s.residual,
            DIRICHLET_RESIDUAL,
        ));
        out.assertions.push(Assertion::holds(
            format!("lyapunov_c_finite {tag}"),
            s.lyapunov_c.is_finite(),
            || format!("C = {}", s.lyapunov_c),
        ));
        out.assertions.push(Assertion::at_least(
            format!("w_at_least_one {tag}"),
            s.min_w,
            1.0 - 1e-12,
        ));
        if s.monotonicity_violations > 0 {
            out.warnings.push(format!(
                "{tag}: W not monotone in |x| on {} u-slices",
                s.monotonicity_violations
            ));
        }
    }
    let t_cap = p.t_cap_factor / h;
    let mc = growth_profile(
        &cfg.process,
        &region,
        &mu,
        theta,
        &p.probes,
        p.n_traj,
        t_cap,
        p.dt,
        cfg.seed,
    )?;
    let cv = crossvalidate(&sc, &sf, &mc)?;
    for q in &cv.probes {
        out.assertions
            .push(Assertion::holds(format!("crossvalidate x={}", q.x), q.passed, || {
                format!(
                    "PDE {} vs MC {} ± {}, δ_disc {}",
                    q.w_extrapolated, q.w_mc, q.std_error, q.delta_disc
                )
            }));
    }
    out.assertions.push(Assertion::at_most(
        "refinement_change",
        cv.max_refinement_change,
        REFINEMENT_LIMIT,
    ));
    let (gx, gmax, interior) = sf.growth_ratio();
    let mut csv = Vec::new();
    sf.write_csv(&mut csv).map_err(|e| CliError::Io(e.to_string()))?;
    out.csv = Some(String::from_utf8(csv).expect("utf-8"));
    out.results = json!({
        "rho": rho_info,
        "mu_u": mu_u,
        "h_mu_u": h,
        "theta": theta,
        "coarse": summary(&sc),
        "fine": summary(&sf),
        "crossvalidation": cv,
        "growth_ratio": { "x": gx, "max": gmax, "interior": interior },
    });
    Ok(out)
}

fn summary(s: &hypocoercivity::DirichletSolution) -> Value {
    json!({
        "nx": s.nx,
        "nu": s.nu,
        "radius": s.radius,
        "residual": s.residual,
        "relative_residual": s.relative_residual,
        "lyapunov_c": s.lyapunov_c,
        "min_w": s.min_w,
        "max_w": s.w.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        "monotonicity_violations": s.monotonicity_violations,
        "solver": s.solver,
    })
}

pub fn hormander(p: &HormanderParams) -> Result<Outcome, CliError> {
    let ff = p
        .weights
        .map_or_else(FieldFamily::rtorus, |[a, b, c]| FieldFamily::rtorus_with(a, b, c));
    let rep = hormander_check(&ff, p.x_max, p.nx, p.nu, p.alpha)?;
    let brackets = bracket_consistency(p.x_max, p.nx, p.nu);
    let mut out = Outcome::default();
    out.assertions.push(Assertion::at_least(
        "min_eigenvalue",
        rep.min_eigenvalue,
        p.alpha - hypocoercivity::assumptions::HORMANDER_TOL,
    ));
    out.assertions.push(Assertion::at_most(
        "bracket_closed_forms",
        brackets,
        hypocoercivity::assumptions::HORMANDER_TOL,
    ));
    let weights: Vec<f64> = ff.fields.iter().map(|(_, a)| *a).collect();
    out.results = json!({ "weights": weights, "report": rep, "bracket_error": brackets });
    Ok(out)
}

pub fn langevin(cfg: &ExperimentConfig, p: &LangevinParams) -> Result<Outcome, CliError> {
    let u = langevin_potential(&cfg.process).expect("validated Langevin process");
    let rep = langevin_conditions(
        u,
        CubeGrid {
            half_width: p.half_width,
            points: p.points,
        },
        p.ball_radius,
    )?;
    let mut out = Outcome::default();
    let expected = p.expect == Expectation::Pass;
    out.assertions
        .push(Assertion::holds("verdict_as_expected", rep.passed == expected, || {
            format!(
                "conditions {} but expected {:?}",
                if rep.passed { "hold" } else { "fail" },
                p.expect
            )
        }));
    out.results = json!({ "report": rep });
    Ok(out)
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        }
    }
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn dispatch(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    match &cfg.experiment {
        Experiment::BoundEval(p) => bound_eval(p),
        Experiment::Deviation(p) => deviation(cfg, p),
        Experiment::Hitting(p) => hitting(cfg, p),
        Experiment::Growth(p) => growth(cfg, p),
        Experiment::SpectralRho(p) => spectral_rho(cfg, p),
        Experiment::Decay(p) => decay(cfg, p),
        Experiment::Dirichlet(p) => dirichlet(cfg, p),
        Experiment::Hormander(p) => hormander(p),
        Experiment::LangevinConditions(p) => langevin(cfg, p),
    }
}
