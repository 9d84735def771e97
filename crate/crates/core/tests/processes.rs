use hypocoercivity::processes::{
    ensemble_time_average, mean_and_se, simulate, FourierMode, Initial, InitialSampler, InvariantMeasure, Observable,
    PolynomialPotential, ProcessSpec, Trig,
};

fn quadratic() -> ProcessSpec {
    ProcessSpec::kinetic_langevin(PolynomialPotential::quadratic(1)).unwrap()
}

#[test]
fn same_seed_same_path() {
    for spec in [
        quadratic(),
        ProcessSpec::rtorus(),
        ProcessSpec::basic_self_interacting(1.0, 2.0).unwrap(),
    ] {
        let obs = [Observable::Cos { coord: 1 }];
        let a = simulate(&spec, &Initial::Invariant, 5.0, 0.01, 42, &obs).unwrap();
        let b = simulate(&spec, &Initial::Invariant, 5.0, 0.01, 42, &obs).unwrap();
        let c = simulate(&spec, &Initial::Invariant, 5.0, 0.01, 43, &obs).unwrap();
        assert_eq!(a.final_state(), b.final_state());
        assert_eq!(a.integral(0), b.integral(0));
        assert_ne!(a.final_state(), c.final_state());
    }
}

#[test]
fn langevin_velocity_second_moment_on_long_paths() {
    let spec = quadratic();
    let s = InitialSampler::new(&spec, &Initial::Invariant).unwrap();
    let est = ensemble_time_average(&spec, &s, |x| x[1] * x[1], 64, 200.0, 0.01, 5).unwrap();
    assert!(est.within(1.0, 0.02, 0.0), "{est:?}");
}

#[test]
fn halving_dt_moves_the_estimate_by_at_most_first_order() {
    let spec = quadratic();
    let s = InitialSampler::new(&spec, &Initial::Invariant).unwrap();
    let coarse = ensemble_time_average(&spec, &s, |x| x[1] * x[1], 2000, 10.0, 0.02, 6).unwrap();
    let fine = ensemble_time_average(&spec, &s, |x| x[1] * x[1], 2000, 10.0, 0.01, 6).unwrap();
    let se = (coarse.std_error.powi(2) + fine.std_error.powi(2)).sqrt();
    // Euler bias of E[v²] is about dt/2; halving dt shrinks it by about half.
    assert!(
        (coarse.mean - fine.mean).abs() <= 0.02 + 3.0 * se,
        "{coarse:?} vs {fine:?}"
    );
    assert!((fine.mean - 1.0).abs() <= (coarse.mean - 1.0).abs() + 3.0 * se);
}

#[test]
fn self_interacting_variances_include_a_second_harmonic() {
    let modes = vec![
        FourierMode::new(1.0, vec![1], Trig::Cos),
        FourierMode::new(0.5, vec![2], Trig::Sin),
    ];
    let spec = ProcessSpec::self_interacting(1, modes.clone()).unwrap();
    let s = InitialSampler::new(&spec, &Initial::Invariant).unwrap();
    for (j, m) in modes.iter().enumerate() {
        let target = 1.0 / (m.coefficient * m.eigenvalue_abs());
        assert_eq!(m.stationary_variance(), target);
        let est = ensemble_time_average(&spec, &s, |x| x[1 + j] * x[1 + j], 1000, 20.0, 0.01, 30 + j as u64).unwrap();
        assert!(est.within(target, 0.0, 0.05), "mode {j}: {est:?} vs {target}");
    }
    assert_eq!(modes[1].stationary_variance(), 0.5);
}

#[test]
fn exact_sampler_moments() {
    let spec = ProcessSpec::rtorus();
    let mu = InvariantMeasure::new(&spec).unwrap();
    let mut rng = hypocoercivity::rng::stream(9, 0);
    let xs: Vec<f64> = (0..20_000).map(|_| mu.sample(&mut rng)[0]).collect();
    let est = mean_and_se(&xs).unwrap();
    assert!(est.mean.abs() <= 3.0 * est.std_error + 1e-3, "{est:?}");
    let quad = Observable::Square { coord: 0 }.mean(&mu);
    let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
    assert!(mean_and_se(&sq).unwrap().within(quad, 0.0, 0.0));
}
