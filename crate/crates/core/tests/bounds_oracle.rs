use hypocoercivity::bounds::{
    decay_envelope, deviation_bound, exact, h_rate, hitting_bound, hitting_rate, lambda_upper, legendre_rate,
    BoundInputs, Extended,
};
use hypocoercivity::oracle;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn inputs() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (1e-3..2.0f64, 0.1..3.0f64, 0.05..1.0f64, 1.0..3.0f64).prop_map(|(rho, inf, frac, dn)| (rho, inf * frac, inf, dn))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn h_rate_matches_fixed_point_oracle((rho, l2, inf, dn) in inputs(), r in 0.0..5.0f64) {
        let b = BoundInputs::new(rho, l2, inf, dn).unwrap();
        prop_assert!(rel(h_rate(r, &b).unwrap(), oracle::h_rate(r, rho, l2, inf)) <= 1e-12);
    }

    #[test]
    fn lambda_upper_matches_oracle((rho, l2, inf, dn) in inputs()) {
        let b = BoundInputs::new(rho, l2, inf, dn).unwrap();
        match (lambda_upper(&b), oracle::lambda_upper(rho, l2, inf)) {
            (Extended::Finite(a), Some(o)) => prop_assert!(rel(a, o) <= 1e-12),
            (Extended::Infinite, None) => {}
            (a, o) => prop_assert!(false, "{a:?} vs {o:?}"),
        }
    }

    #[test]
    fn deviation_bound_matches_oracle((rho, l2, inf, dn) in inputs(), r in 0.0..3.0f64, t in 0.0..50.0f64) {
        let b = BoundInputs::new(rho, l2, inf, dn).unwrap();
        let got = deviation_bound(t, r, &b).unwrap();
        prop_assert!(rel(got, oracle::deviation_bound(t, r, rho, l2, inf, dn)) <= 1e-12);
    }

    #[test]
    fn deviation_bound_decreases_in_t((rho, l2, inf, dn) in inputs(), r in 1e-3..3.0f64, t in 0.0..50.0f64) {
        let b = BoundInputs::new(rho, l2, inf, dn).unwrap();
        prop_assert!(deviation_bound(t + 1.0, r, &b).unwrap() < deviation_bound(t, r, &b).unwrap());
    }

    #[test]
    fn hitting_bound_matches_oracle_and_increases(rho in 1e-3..2.0f64, mu_u in 0.01..0.99f64, dn in 1.0..3.0f64, f in 0.0..0.98f64) {
        let b = BoundInputs::for_indicator(rho, mu_u, dn).unwrap();
        let h = hitting_rate(mu_u, rho).unwrap();
        let lo = hitting_bound(f * h, mu_u, &b).unwrap();
        let hi = hitting_bound((f + 0.01) * h, mu_u, &b).unwrap();
        prop_assert!(rel(lo, oracle::hitting_bound(f * h, mu_u, rho, dn)) <= 1e-12);
        prop_assert!(hi > lo);
    }

    #[test]
    fn decay_envelope_matches_oracle(rho in 1e-4..5.0f64, s in 0.0..1.0f64) {
        // Exponent below 75 keeps the fixed-point oracle at full precision.
        let t = s * 75.0 * 1.5 / rho;
        prop_assert!(rel(decay_envelope(t, rho).unwrap(), oracle::decay_envelope(t, rho)) <= 1e-12);
    }

    #[test]
    fn legendre_matches_golden_section_and_dominates(r in 1e-4..10.0f64, l0 in 1e-3..10.0f64, beta in 0.0..10.0f64) {
        let closed = legendre_rate(r, l0, beta).unwrap();
        let (_, g) = oracle::maximize_on_grid(|l| l * r - beta * l * l / (l0 - l), 0.0, l0 * (1.0 - 1e-15), 2000);
        prop_assert!(rel(closed, g) <= 1e-9, "{closed} vs {g}");
        prop_assert!(closed >= l0 * r * r / (4.0 * (beta + r)) * (1.0 - 1e-15));
    }

    #[test]
    fn exact_rational_h_agrees_with_float(n in 1i64..200, d in 1i64..200, rn in 1i64..50, l2n in 1i64..50, infn in 50i64..100) {
        let (rho, r, l2, inf) = (exact::q(n, d), exact::q(rn, 10), exact::q(l2n, 50), exact::q(infn, 50));
        let h = exact::h_rate(&r, &rho, &(&l2 * &l2), &inf).unwrap();
        let b = BoundInputs::new(n as f64 / d as f64, l2n as f64 / 50.0, infn as f64 / 50.0, 1.0).unwrap();
        let f = h_rate(rn as f64 / 10.0, &b).unwrap();
        prop_assert!(rel(f, num_traits::ToPrimitive::to_f64(&h).unwrap()) <= 1e-13);
    }
}

#[test]
fn frozen_values() {
    let unit = BoundInputs::new(1.0, 1.0, 1.0, 1.0).unwrap();
    assert_eq!(
        exact::h_rate(&exact::q(1, 1), &exact::q(1, 1), &exact::q(1, 1), &exact::q(1, 1)),
        Some(exact::q(1, 31))
    );
    // √2·e^{−31/31}
    assert!(rel(deviation_bound(31.0, 1.0, &unit).unwrap(), 0.520_260_095_022_684_6) <= 1e-12);
    let small = BoundInputs::new(1.0, 0.1, 0.1, 1.0).unwrap();
    assert!(rel(lambda_upper(&small).finite().unwrap(), 0.25 / 3.4) <= 1e-14);
    assert!(lambda_upper(&unit).is_infinite());
    assert!(rel(legendre_rate(1.0, 1.0, 1.0).unwrap(), 1.0 / (1.0 + 2f64.sqrt()).powi(2)) <= 1e-14);
    // ρ = 1, μ(U) = 0.31 gives h = 0.01; θ = h/2 gives 1 + √2.
    let ind = BoundInputs::for_indicator(1.0, 0.31, 1.0).unwrap();
    assert!(rel(hitting_rate(0.31, 1.0).unwrap(), 0.01) <= 1e-14);
    assert!(rel(hitting_bound(0.005, 0.31, &ind).unwrap(), 1.0 + 2f64.sqrt()) <= 1e-12);
    assert!(rel(hitting_bound(0.00999, 0.31, &ind).unwrap(), 1.0 + 2f64.sqrt() * 999.0) <= 1e-9);
    assert!(hitting_bound(0.01, 0.31, &ind).is_err());
    assert!(rel(decay_envelope(0.0, 0.3).unwrap(), 3f64.sqrt()) <= 1e-15);
    assert!(rel(decay_envelope(1.5 / 0.3, 0.3).unwrap(), 3f64.sqrt() * (-1f64).exp()) <= 1e-14);
}
