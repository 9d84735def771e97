use hypocoercivity::processes::PolynomialPotential;
use hypocoercivity::spectral::{
    build_dms, build_langevin_generator, build_rtorus_generator, decay_check_vectors, estimate_rho, negative_control,
    poincare_constants, random_mean_zero, Discretization, DmsOperators, GridOperator, Scheme,
};
use proptest::prelude::*;

const UPWIND: Discretization = Discretization::FiniteVolume { scheme: Scheme::Upwind };

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn grid(modal: bool, nx: usize, nu: usize, r: f64) -> GridOperator {
    build_rtorus_generator(nx, nu, r, if modal { Discretization::Modal } else { UPWIND }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn generator_contracts(modal in any::<bool>(), nx in 2usize..5, nu in prop::sample::select(vec![16usize, 32]), r in 20.0..40.0f64, seed in 0u64..1000) {
        let g = grid(modal, 16 * nx, nu, r);
        let inv = g.invariants();
        prop_assert!(inv.conservation_error <= 1e-10);
        prop_assert!(inv.invariance_error <= 1e-8);
        prop_assert!(inv.weight_sum_error <= 1e-12);
        let d = DmsOperators::new(&g, 0.5).unwrap();
        let rep = d.check(&g, seed);
        prop_assert!(rep.s_symmetry_error <= 1e-10 && rep.s_norm <= 0.5 + 1e-10 && rep.h3_error <= 1e-8, "{rep:?}");
        for i in 0..5 {
            let f = random_mean_zero(&g, seed, i);
            let q = d.b_norm_sq(&f) / g.inner(&f, &f);
            prop_assert!((0.5..=1.5).contains(&q));
            // Reversal conjugates L into its adjoint.
            let lhs = g.apply_l_adjoint(&f);
            let rhs = g.reversal(&g.apply_l(&g.reversal(&f)));
            prop_assert!(max_abs(&sub(&lhs, &rhs)) <= 1e-9 * (1.0 + max_abs(&lhs)));
            // Π is an orthogonal projection fixing u-independent functions.
            let pf = g.project(&f);
            prop_assert!(max_abs(&sub(&g.project(&pf), &pf)) <= 1e-12 * (1.0 + max_abs(&pf)));
        }
    }
}

#[test]
fn fast_part_acts_on_cosine_as_minus_one() {
    let g = grid(false, 32, 64, 20.0);
    let f = g.sample(|_, u| u.cos());
    let q = g.apply_q(&f);
    let du = std::f64::consts::TAU / 64.0;
    let err = max_abs(&q.iter().zip(&f).map(|(a, b)| a + b).collect::<Vec<_>>());
    assert!(err <= du * du, "{err}");

    let m = grid(true, 32, 16, 20.0);
    let f = m.sample(|_, u| u.cos());
    let q = m.apply_q(&f);
    assert!(max_abs(&q.iter().zip(&f).map(|(a, b)| a + b).collect::<Vec<_>>()) <= 1e-12);
}

#[test]
fn angular_poincare_gap_is_one() {
    let g = grid(false, 32, 64, 20.0);
    assert!((poincare_constants(&g).unwrap().gap_u - 1.0).abs() <= 1e-3);
}

#[test]
fn projection_fixes_functions_of_x() {
    for modal in [true, false] {
        let g = grid(modal, 32, 16, 20.0);
        let f = g.sample(|x, _| (-x * x / 10.0).exp());
        assert!(max_abs(&sub(&g.project(&f), &f)) <= 1e-12);
    }
}

#[test]
fn certificate_positive_and_negative_control_null() {
    let g = grid(true, 64, 32, 40.0);
    let d = build_dms(&g, 0.5).unwrap();
    let est = estimate_rho(&g, &d).unwrap();
    // Regression baseline at 64×32, R = 40.
    assert!((est.rho - 0.0272966).abs() <= 1e-6, "{}", est.rho);
    assert!(negative_control(&g).value.abs() <= 1e-3);
}

#[test]
fn langevin_grid_certifies() {
    let g = build_langevin_generator(64, 16, 8.0, &PolynomialPotential::quadratic(1), Discretization::Modal).unwrap();
    let d = build_dms(&g, 0.5).unwrap();
    assert!(estimate_rho(&g, &d).unwrap().rho > 0.0);
}

#[test]
fn decay_rejects_non_centered_data() {
    let g = grid(true, 32, 16, 20.0);
    let d = build_dms(&g, 0.5).unwrap();
    let est = estimate_rho(&g, &d).unwrap();
    let one = g.constant().to_vec();
    assert!(decay_check_vectors(&g, &d, &est, &[0.0], &[one]).is_err());
    let f = random_mean_zero(&g, 1, 0);
    let rep = decay_check_vectors(&g, &d, &est, &[0.0, 1.0], &[f]).unwrap();
    assert!(rep.passed);
}

#[test]
fn bad_sizes_and_epsilon_are_rejected() {
    assert!(build_rtorus_generator(8, 8, 20.0, Discretization::Modal).is_err());
    let g = grid(true, 32, 16, 20.0);
    assert!(DmsOperators::new(&g, 0.0).is_err());
    assert!(DmsOperators::new(&g, 1.0).is_err());
}
