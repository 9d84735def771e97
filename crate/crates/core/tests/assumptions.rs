use hypocoercivity::assumptions::{
    bracket_consistency, hormander_check, langevin_conditions, lie_bracket_fd, CubeGrid, FieldFamily, VectorField,
};
use hypocoercivity::processes::{vprime, PolynomialPotential, Potential, VPRIME_SUP};

#[test]
fn brackets_match_closed_forms() {
    assert!(bracket_consistency(20.0, 80, 40) <= 1e-6);
    let (y0, y1) = (VectorField::y0(), VectorField::y1());
    for &(x, u) in &[(0.3, 1.1), (-2.0, 4.0), (1.45, 0.2)] {
        let z2 = lie_bracket_fd(&y1, &y0, x, u, 1e-4);
        let expect = [-f64::sin(u), vprime(x) * u.cos()];
        assert!(
            (z2[0] - expect[0]).abs() <= 1e-6 && (z2[1] - expect[1]).abs() <= 1e-6,
            "{z2:?}"
        );
    }
}

#[test]
fn hormander_weights() {
    // The lower-right entry is a₁ + V′², so the minimum is min(1, a₁) and
    // a₁ below ‖V′‖∞² still passes at ½.
    const { assert!(0.6 < VPRIME_SUP * VPRIME_SUP) };
    let ok = hormander_check(&FieldFamily::rtorus_with(0.6, 1.0, 1.0), 20.0, 201, 100, 0.5).unwrap();
    assert!(ok.passed && (ok.min_eigenvalue - 0.6).abs() <= 1e-3);
    let weak = hormander_check(&FieldFamily::rtorus_with(0.25, 1.0, 1.0), 20.0, 201, 100, 0.5).unwrap();
    assert!(!weak.passed && weak.min_eigenvalue < 0.5);
    assert!(weak.argmin[0].abs() < 0.2);
}

#[test]
fn quadratic_in_two_dimensions() {
    let u = PolynomialPotential::quadratic(2);
    let rep = langevin_conditions(
        &u,
        CubeGrid {
            half_width: 10.0,
            points: 201,
        },
        2.5,
    )
    .unwrap();
    assert!(rep.passed);
    assert_eq!((rep.c1, rep.c2), (Some(2.0), Some(0.0)));
    assert!((rep.c3.value - 1.0).abs() <= 1e-12);
    assert!(rep.confinement.value > 0.0);
}

#[test]
fn quartic_needs_positive_c2() {
    let u = PolynomialPotential::new(1, vec![0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
    let rep = langevin_conditions(
        &u,
        CubeGrid {
            half_width: 10.0,
            points: 401,
        },
        1.5,
    )
    .unwrap();
    assert!(rep.passed);
    // Regression baseline: ΔU = 12x² outgrows any constant, so c₂ = 0 fails.
    assert!(rep.c2.unwrap() > 0.0, "{rep:?}");
    assert_eq!(rep.c2, Some(0.01));
}

#[test]
fn constant_potential_fails_confinement() {
    let u = PolynomialPotential::new(1, vec![3.0]).unwrap();
    let rep = langevin_conditions(
        &u,
        CubeGrid {
            half_width: 10.0,
            points: 101,
        },
        2.5,
    )
    .unwrap();
    assert!(!rep.passed);
    assert_eq!(rep.confinement.value, 0.0);
}

struct Broken;

impl Potential for Broken {
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, _: &[f64]) -> f64 {
        f64::NAN
    }
    fn gradient(&self, _: &[f64], out: &mut [f64]) {
        out[0] = f64::NAN;
    }
    fn laplacian(&self, _: &[f64]) -> f64 {
        f64::NAN
    }
    fn hessian_norm(&self, _: &[f64]) -> f64 {
        f64::NAN
    }
}

#[test]
fn nan_evaluator_is_an_input_error() {
    let err = langevin_conditions(
        &Broken,
        CubeGrid {
            half_width: 2.0,
            points: 11,
        },
        1.0,
    )
    .unwrap_err();
    assert!(matches!(err, hypocoercivity::Error::Domain(_)), "{err:?}");
}
