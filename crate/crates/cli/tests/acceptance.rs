//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test --release -p hypocoercivity-cli --test acceptance`.

use std::ops::ControlFlow;
use std::process::ExitCode;
use std::time::Instant;

use hypoco::{run, ExperimentConfig, Report};
use hypocoercivity::assumptions::{bracket_consistency, hormander_check, langevin_conditions, CubeGrid, FieldFamily};
use hypocoercivity::bounds::{self, exact, BoundInputs, Extended};
use hypocoercivity::oracle;
use hypocoercivity::processes::{
    ensemble_time_average, ks_critical, ks_uniform, run_path, steps_for, FourierMode, Initial, InitialSampler,
    PolynomialPotential, ProcessSpec, Trig,
};
use hypocoercivity::rng::stream;
use hypocoercivity::spectral::{
    build_rtorus_generator, decay_check, estimate_rho, negative_control, random_mean_zero, Discretization,
    DmsOperators, GridOperator,
};
use rand::Rng;
use rayon::prelude::*;

type Outcome = Result<(bool, String), String>;

const REF_NX: usize = 128;
const REF_NU: usize = 64;
const REF_R: f64 = 40.0;

fn reference_grid(nx: usize, nu: usize) -> GridOperator {
    build_rtorus_generator(nx, nu, REF_R, Discretization::Modal).expect("reference grid builds")
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

fn run_toml(text: &str) -> Result<Report, String> {
    let cfg = ExperimentConfig::parse(text).map_err(|e| e.to_string())?;
    run(&cfg).map_err(|e| e.to_string())
}

fn failures(rep: &Report) -> String {
    rep.failures()
        .map(|a| format!("{}: {}", a.name, a.detail.as_deref().unwrap_or("")))
        .collect::<Vec<_>>()
        .join("; ")
}

fn criterion_1() -> Outcome {
    let mut rng = stream(1, 0);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let rho = rng.random_range(1e-3..2.0);
        let v_inf = rng.random_range(0.1..3.0);
        let v_l2 = v_inf * rng.random_range(0.05..1.0);
        let dn = rng.random_range(1.0..3.0);
        let r = rng.random_range(1e-3..3.0);
        let t = rng.random_range(0.1..20.0);
        let mu_u = rng.random_range(0.05..0.95);
        let inputs = BoundInputs::new(rho, v_l2, v_inf, dn).map_err(|e| e.to_string())?;
        let h_mu = bounds::hitting_rate(mu_u, rho).map_err(|e| e.to_string())?;
        let theta = h_mu * rng.random_range(0.01..0.99);
        let Extended::Finite(l0) = inputs.lambda0() else {
            return Err("λ₀ infinite".into());
        };
        match (
            bounds::lambda_upper(&inputs).finite(),
            oracle::lambda_upper(rho, v_l2, v_inf),
        ) {
            (Some(a), Some(b)) => worst = worst.max(rel(a, b)),
            (None, None) => {}
            (a, b) => {
                return Ok((
                    false,
                    format!("Λ upper {a:?} vs oracle {b:?} at ρ = {rho}, ‖V‖∞ = {v_inf}"),
                ))
            }
        }
        let pairs = [
            (bounds::h_rate(r, &inputs).unwrap(), oracle::h_rate(r, rho, v_l2, v_inf)),
            (
                bounds::legendre_rate(r, l0, inputs.beta()).unwrap(),
                oracle::legendre_rate(r, l0, inputs.beta()),
            ),
            (
                bounds::deviation_bound(t, r, &inputs).unwrap(),
                oracle::deviation_bound(t, r, rho, v_l2, v_inf, dn),
            ),
            (
                bounds::hitting_bound(theta, mu_u, &inputs).unwrap(),
                oracle::hitting_bound(theta, mu_u, rho, dn),
            ),
            (bounds::decay_envelope(t, rho).unwrap(), oracle::decay_envelope(t, rho)),
        ];
        for (a, b) in pairs {
            worst = worst.max(rel(a, b));
        }
    }
    let one = exact::q(1, 1);
    let h = exact::h_rate(&one, &one, &one, &one).ok_or("exact h undefined")?;
    let exact_ok = h == exact::q(1, 31);
    Ok((
        worst <= 1e-12 && exact_ok,
        format!("max rel err {worst:.2e} (≤ 1e-12), h(1; 1, 1, 1) = {h}"),
    ))
}

fn criterion_2() -> Outcome {
    let mut rng = stream(2, 0);
    let mut worst = 0.0_f64;
    let mut dominated = true;
    for _ in 0..1000 {
        let r = rng.random_range(1e-3..5.0);
        let l0 = rng.random_range(1e-3..5.0);
        let beta = rng.random_range(1e-3..5.0);
        let closed = bounds::legendre_rate(r, l0, beta).map_err(|e| e.to_string())?;
        let (_, g) = oracle::golden_section_max(|l| l * r - beta * l * l / (l0 - l), 0.0, l0, 1e-14 * l0);
        worst = worst.max(rel(closed, g));
        dominated &= closed >= l0 * r * r / (4.0 * (beta + r)) * (1.0 - 1e-15);
    }
    Ok((
        worst <= 1e-9 && dominated,
        format!("max rel err {worst:.2e} (≤ 1e-9), dominates λ₀r²/(4(β+r)): {dominated}"),
    ))
}

fn criterion_3() -> Outcome {
    let g = reference_grid(REF_NX, REF_NU);
    let inv = g.invariants();
    let d = DmsOperators::new(&g, 0.5).map_err(|e| e.to_string())?;
    let rep = d.check(&g, 3);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..100 {
        let f = random_mean_zero(&g, 3, i);
        let q = d.b_norm_sq(&f) / g.inner(&f, &f);
        lo = lo.min(q);
        hi = hi.max(q);
    }
    let ok = inv.conservation_error <= 1e-10
        && inv.invariance_error <= 1e-8
        && rep.h3_error <= 1e-8
        && rep.s_symmetry_error <= 1e-10
        && rep.s_norm <= 0.5 + 1e-10
        && lo >= 0.5
        && hi <= 1.5;
    Ok((
        ok,
        format!(
            "L1 {:.1e}, wL {:.1e}, ΠTΠ {:.1e} (TΠT {:.2e}, reported), S sym {:.1e}, ‖S‖ {:.5}, ‖f‖_B²/‖f‖² ∈ [{lo:.4}, {hi:.4}]",
            inv.conservation_error, inv.invariance_error, rep.h3_error, rep.t_pi_t_norm, rep.s_symmetry_error, rep.s_norm
        ),
    ))
}

fn criterion_4() -> Result<(bool, String, f64), String> {
    let g = reference_grid(REF_NX, REF_NU);
    let d = DmsOperators::new(&g, 0.5).map_err(|e| e.to_string())?;
    let est = estimate_rho(&g, &d).map_err(|e| e.to_string())?;
    let neg = negative_control(&g).value;
    let gf = reference_grid(2 * REF_NX, 2 * REF_NU);
    let df = DmsOperators::new(&gf, 0.5).map_err(|e| e.to_string())?;
    let fine = estimate_rho(&gf, &df).map_err(|e| e.to_string())?;
    let change = rel(fine.rho, est.rho);
    let ok = est.rho > 0.0 && neg <= 1e-3 && change <= 0.05;
    Ok((
        ok,
        format!(
            "ρ = {:.7} (128×64), {:.7} (256×128), change {:.2}%, negative control {neg:.1e}",
            est.rho,
            fine.rho,
            100.0 * change
        ),
        est.rho.min(fine.rho),
    ))
}

fn criterion_5() -> Outcome {
    let g = reference_grid(REF_NX, REF_NU);
    let d = DmsOperators::new(&g, 0.5).map_err(|e| e.to_string())?;
    let est = estimate_rho(&g, &d).map_err(|e| e.to_string())?;
    let rep = decay_check(&g, &d, &est, &[0.5, 1.0, 2.0, 5.0], 20, 5).map_err(|e| e.to_string())?;
    let worst = rep.points.iter().map(|p| p.envelope_ratio).fold(0.0, f64::max);
    Ok((
        rep.passed && worst <= 1.0 + 1e-8,
        format!("max ‖e^{{tL}}f‖/(√3e^{{−2ρt/3}}‖f‖) = {worst:.4} over 20 f × 4 t"),
    ))
}

fn criterion_6(rho: f64) -> Outcome {
    let rep = run_toml(&format!(
        "seed = 6\n[experiment]\nkind = \"deviation\"\nobservable = {{ kind = \"cos\", coord = 1 }}\nt = 10.0\nr = [0.1, 0.2, 0.3, 0.4]\nn_traj = 100000\ndt = 0.01\nlevel = 0.999\nrho = {rho:e}\n"
    ))?;
    let rows: Vec<String> = rep.results["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            format!(
                "r={}: {:.4} ≤ {:.4}",
                r["estimate"]["r"],
                r["estimate"]["ci_upper"].as_f64().unwrap(),
                r["bound"].as_f64().unwrap()
            )
        })
        .collect();
    Ok((rep.passed, format!("{} {}", rows.join(", "), failures(&rep))))
}

fn criterion_7(rho: f64) -> Outcome {
    let rep = run_toml(&format!(
        "seed = 7\n[experiment]\nkind = \"hitting\"\ntarget = {{ lo = -1.0, hi = 1.0 }}\ntheta_fractions = [0.25, 0.5, 0.75]\nn_traj = 10000\ndt = 0.01\nrho = {rho:e}\n"
    ))?;
    let rows: Vec<String> = rep.results["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            let e = &r["estimate"];
            format!(
                "{}h: {:.5}+3·{:.1e} ≤ {:.4}",
                r["fraction"],
                e["mean"].as_f64().unwrap(),
                e["std_error"].as_f64().unwrap(),
                r["bound"].as_f64().unwrap()
            )
        })
        .collect();
    Ok((
        rep.passed,
        format!(
            "{}, censored {} {}",
            rows.join(", "),
            rep.results["censored"],
            failures(&rep)
        ),
    ))
}

fn criterion_8(rho: f64) -> Outcome {
    let rep = run_toml(&format!(
        "seed = 8\n[experiment]\nkind = \"dirichlet\"\ntarget = {{ lo = -1.0, hi = 1.0 }}\ntheta_fraction = 0.5\ngrid = {{ nx = 192, n_fast = 64, radius = 24.0, scheme = \"upwind\" }}\nprobes = [1.5, 2.0, 3.0, 4.0, 6.0]\nn_traj = 20000\ndt = 0.01\nrho = {rho:e}\n"
    ))?;
    let fine = &rep.results["fine"];
    Ok((
        rep.passed,
        format!(
            "{} probes cross-validated, residual {:.1e}, C = {:.4}, W ≡ 1 at θ = 0 {}",
            rep.results["crossvalidation"]["probes"].as_array().unwrap().len(),
            fine["residual"].as_f64().unwrap(),
            fine["lyapunov_c"].as_f64().unwrap(),
            failures(&rep)
        ),
    ))
}

fn criterion_9(rho: f64) -> Outcome {
    let rep = run_toml(&format!(
        "seed = 9\n[experiment]\nkind = \"growth\"\ntarget = {{ lo = -1.0, hi = 1.0 }}\ntheta_fraction = 0.5\nx_points = [2.0, 4.0, 6.0, 8.0]\nn_traj = 10000\ndt = 0.01\nrho = {rho:e}\n"
    ))?;
    let ratios: Vec<String> = rep.results["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| format!("{:.4}", p["ratio"].as_f64().unwrap()))
        .collect();
    Ok((
        rep.passed,
        format!(
            "Ŵ/e^{{V/2}} at x = 2, 4, 6, 8: [{}] {}",
            ratios.join(", "),
            failures(&rep)
        ),
    ))
}

fn criterion_10() -> Outcome {
    let rep = hormander_check(&FieldFamily::rtorus(), 20.0, 400, 200, 0.5).map_err(|e| e.to_string())?;
    let brackets = bracket_consistency(20.0, 400, 200);
    Ok((
        rep.min_eigenvalue >= 0.5 - 1e-6 && brackets <= 1e-6,
        format!(
            "min eigenvalue {:.6} at {:?}, bracket error {brackets:.1e}",
            rep.min_eigenvalue, rep.argmin
        ),
    ))
}

fn criterion_11() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (d, points) in [(1usize, 401usize), (2, 201)] {
        let u = PolynomialPotential::quadratic(d);
        let rep = langevin_conditions(
            &u,
            CubeGrid {
                half_width: 10.0,
                points,
            },
            2.5,
        )
        .map_err(|e| e.to_string())?;
        let c1 = rep.c1.unwrap_or(f64::NAN);
        let this =
            rep.passed && rep.c2 == Some(0.0) && (c1 - d as f64).abs() <= 1e-9 && (rep.c3.value - 1.0).abs() <= 1e-9;
        ok &= this;
        parts.push(format!(
            "d={d}: c₁ = {c1}, c₂ = {:?}, c₃ = {}",
            rep.c2.unwrap_or(f64::NAN),
            rep.c3.value
        ));
    }
    let flat = PolynomialPotential::new(1, vec![1.0]).map_err(|e| e.to_string())?;
    let rep = langevin_conditions(
        &flat,
        CubeGrid {
            half_width: 10.0,
            points: 101,
        },
        2.5,
    )
    .map_err(|e| e.to_string())?;
    let fails_i = !rep.passed && rep.confinement.value <= 0.0;
    ok &= fails_i;
    parts.push(format!("constant U fails (i): {fails_i}"));
    Ok((ok, parts.join(", ")))
}

fn final_coordinates(
    spec: &ProcessSpec,
    coord: usize,
    n: usize,
    t: f64,
    dt: f64,
    seed: u64,
) -> Result<Vec<f64>, String> {
    let sampler = InitialSampler::new(spec, &Initial::Invariant).map_err(|e| e.to_string())?;
    let steps = steps_for(t, dt).map_err(|e| e.to_string())?;
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            let mut state = vec![0.0; spec.state_dim()];
            sampler.draw(&mut rng, &mut state);
            run_path(spec, &mut state, steps, dt, &mut rng, |_, _| ControlFlow::Continue(()))
                .map_err(|e| e.to_string())?;
            Ok(state[coord])
        })
        .collect()
}

fn criterion_12() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();

    let langevin = ProcessSpec::kinetic_langevin(PolynomialPotential::quadratic(1)).map_err(|e| e.to_string())?;
    let sampler = InitialSampler::new(&langevin, &Initial::Invariant).map_err(|e| e.to_string())?;
    let v2 = ensemble_time_average(&langevin, &sampler, |s| s[1] * s[1], 10_000, 10.0, 0.01, 12)
        .map_err(|e| e.to_string())?;
    ok &= v2.within(1.0, 0.02, 0.0);
    parts.push(format!("E[v²] = {:.4} ± {:.1e}", v2.mean, v2.std_error));

    let modes = vec![
        FourierMode::new(1.0, vec![1], Trig::Cos),
        FourierMode::new(2.0, vec![1], Trig::Sin),
        FourierMode::new(0.5, vec![2], Trig::Cos),
    ];
    let si = ProcessSpec::self_interacting(1, modes.clone()).map_err(|e| e.to_string())?;
    let sampler = InitialSampler::new(&si, &Initial::Invariant).map_err(|e| e.to_string())?;
    for (j, m) in modes.iter().enumerate() {
        let target = 1.0 / (m.coefficient * m.eigenvalue_abs());
        let est = ensemble_time_average(&si, &sampler, |s| s[1 + j] * s[1 + j], 4000, 20.0, 0.01, 120 + j as u64)
            .map_err(|e| e.to_string())?;
        ok &= est.within(target, 0.0, 0.05);
        parts.push(format!("Var U_{} = {:.4} (target {target:.4})", j + 1, est.mean));
    }

    let n = 100_000;
    let crit = ks_critical(n, 0.01);
    for (name, spec, coord) in [
        ("self-interacting x", &si, 0usize),
        ("ℝ×𝕋 u", &ProcessSpec::rtorus(), 1),
    ] {
        let xs = final_coordinates(spec, coord, n, 1.0, 0.01, 1200 + coord as u64)?;
        let d = ks_uniform(&xs, 0.0, std::f64::consts::TAU);
        ok &= d <= crit;
        parts.push(format!("KS {name} {d:.4} ≤ {crit:.4}"));
    }
    Ok((ok, parts.join(", ")))
}

fn criterion_13(rho: f64) -> Outcome {
    let configs = [
        format!("seed = 13\n[experiment]\nkind = \"hitting\"\ntarget = {{ lo = -1.0, hi = 1.0 }}\ntheta_fractions = [0.5]\nn_traj = 5000\nrho = {rho:e}\n"),
        format!("seed = 13\n[experiment]\nkind = \"deviation\"\nobservable = {{ kind = \"cos\", coord = 1 }}\nt = 2.0\nr = [0.3]\nn_traj = 5000\nrho = {rho:e}\n"),
        "seed = 13\n[experiment]\nkind = \"spectral-rho\"\ngrid = { nx = 64, n_fast = 32, radius = 40.0, scheme = \"modal\" }\nnorm_checks = 20\n".to_string(),
    ];
    let mut ok = true;
    for text in &configs {
        let mut cfg = ExperimentConfig::parse(text).map_err(|e| e.to_string())?;
        let mut contents = Vec::new();
        for w in [1, 4, 8] {
            cfg.workers = Some(w);
            contents.push(run(&cfg).map_err(|e| e.to_string())?.content());
        }
        ok &= contents.windows(2).all(|p| p[0] == p[1]);
    }
    Ok((
        ok,
        format!("{} experiments identical across 1, 4, 8 workers", configs.len()),
    ))
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report = |n: usize, limit_s: f64, start: Instant, outcome: Outcome| {
        let secs = start.elapsed().as_secs_f64();
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        all &= passed;
        println!(
            "criterion {n:>2} {} ({secs:.1} s, limit {limit_s} s): {detail}",
            if passed { "PASS" } else { "FAIL" }
        );
    };

    let s = Instant::now();
    report(1, 1.0, s, criterion_1());
    let s = Instant::now();
    report(2, 10.0, s, criterion_2());
    let s = Instant::now();
    report(3, 60.0, s, criterion_3());
    let s = Instant::now();
    let (c4, rho) = match criterion_4() {
        Ok((ok, detail, rho)) => (Ok((ok, detail)), rho),
        Err(e) => (Err(e), f64::NAN),
    };
    report(4, 300.0, s, c4);
    let s = Instant::now();
    report(5, 120.0, s, criterion_5());
    let s = Instant::now();
    report(6, 900.0, s, criterion_6(rho));
    let s = Instant::now();
    report(7, 900.0, s, criterion_7(rho));
    let s = Instant::now();
    report(8, 600.0, s, criterion_8(rho));
    let s = Instant::now();
    report(9, 600.0, s, criterion_9(rho));
    let s = Instant::now();
    report(10, 30.0, s, criterion_10());
    let s = Instant::now();
    report(11, 10.0, s, criterion_11());
    let s = Instant::now();
    report(12, 300.0, s, criterion_12());
    let s = Instant::now();
    report(13, 300.0, s, criterion_13(rho));

    if all {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
