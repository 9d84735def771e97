use statrs::function::beta::beta_reg;

const BISECTION_STEPS: usize = 200;

/// One-sided exact binomial upper confidence limit at level `level`.
///
/// Returns the `p` solving `P(X ≤ k | n, p) = 1 − level`, using
/// `P(X ≤ k) = I_{1−p}(n−k, k+1)`; equals 1 when `k = n`.
pub fn upper_bound(successes: u64, trials: u64, level: f64) -> f64 {
    assert!(trials > 0 && successes <= trials, "need 0 ≤ k ≤ n, n > 0");
    assert!(level > 0.0 && level < 1.0, "level must lie in (0, 1)");
    if successes == trials {
        return 1.0;
    }
    let (k, n) = (successes as f64, trials as f64);
    let alpha = 1.0 - level;
    let cdf = |p: f64| beta_reg(n - k, k + 1.0, 1.0 - p);
    // cdf decreases from 1 at p = 0 to 0 at p = 1.
    let (mut lo, mut hi) = (successes as f64 / trials as f64, 1.0);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// One-sided exact binomial lower confidence limit; 0 when `k = 0`.
pub fn lower_bound(successes: u64, trials: u64, level: f64) -> f64 {
    if successes == 0 {
        return 0.0;
    }
    1.0 - upper_bound(trials - successes, trials, level)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_successes_closed_form() {
        // P(X = 0) = (1−p)ⁿ = α  ⇒  p = 1 − α^{1/n}.
        for n in [1u64, 10, 1000, 100_000] {
            let want = -(0.001_f64.ln() / n as f64).exp_m1();
            let got = upper_bound(0, n, 0.999);
            assert!((got - want).abs() <= 1e-9 * want, "{n}: {got} vs {want}");
        }
    }

    #[test]
    fn full_successes_give_one() {
        assert_eq!(upper_bound(7, 7, 0.95), 1.0);
        assert_eq!(lower_bound(0, 7, 0.95), 0.0);
    }

    #[test]
    fn bounds_bracket_point_estimate() {
        let (k, n) = (37, 200);
        let u = upper_bound(k, n, 0.99);
        let l = lower_bound(k, n, 0.99);
        assert!(l < k as f64 / n as f64 && (k as f64 / n as f64) < u);
    }
}
