use hypocoercivity::dirichlet::solve_dirichlet;
use hypocoercivity::montecarlo::Region;
use hypocoercivity::spectral::{build_rtorus_generator, Discretization, GridOperator, Scheme};

fn grid() -> GridOperator {
    build_rtorus_generator(96, 32, 24.0, Discretization::FiniteVolume { scheme: Scheme::Upwind }).unwrap()
}

fn band() -> Region {
    Region::Band {
        coord: 0,
        lo: -1.0,
        hi: 1.0,
    }
}

// h(μ(U)) at the reference ρ; θ is half of it.
const THETA: f64 = 0.5 * 5.4324e-4;

#[test]
fn positive_theta_gives_a_lyapunov_function() {
    let s = solve_dirichlet(&grid(), &band(), THETA).unwrap();
    assert!(s.residual <= 1e-6 && s.lyapunov_c.is_finite());
    assert!(s.min_w >= 1.0);
    assert_eq!(s.monotonicity_violations, 0);
    // Frozen from this grid: W(1.5) and W(6).
    assert!((s.at(1.5) - 1.000601).abs() <= 2e-6, "{}", s.at(1.5));
    assert!((s.at(6.0) - 1.002589).abs() <= 2e-6, "{}", s.at(6.0));
    assert_eq!(s.at(0.0), 1.0);
    assert_eq!(s.at(-0.5), 1.0);
}

#[test]
fn w_increases_with_theta() {
    let g = grid();
    let a = solve_dirichlet(&g, &band(), 0.5 * THETA).unwrap();
    let b = solve_dirichlet(&g, &band(), THETA).unwrap();
    assert!(a.w.iter().zip(&b.w).all(|(x, y)| x <= y));
}

#[test]
fn whole_space_target_is_identically_one() {
    let s = solve_dirichlet(&grid(), &Region::Whole, THETA).unwrap();
    assert!(s.w.iter().all(|&w| w == 1.0));
}

#[test]
fn csv_dump_has_one_row_per_cell() {
    let s = solve_dirichlet(&grid(), &band(), THETA).unwrap();
    let mut buf = Vec::new();
    s.write_csv(&mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + s.w.len());
}
