//! Monte Carlo estimators confronting the bounds with simulation.
//!
//! Every trajectory `i` of a batch runs on its own stream `(seed, i)`.
//! Batches fan out over rayon and are collected in index order, so the
//! reductions (counts and compensated sums) do not depend on the number of
//! worker threads.

pub mod clopper_pearson;
mod hitting;
mod tail;

use serde::{Deserialize, Serialize};

pub use hitting::{
    censoring_gate, exp_moment, growth_profile, hitting_times, ExpMomentEstimate, GrowthPoint, HittingSample,
};
pub use tail::{tail_from_averages, tail_probabilities, tail_probability, time_averages, TailEstimate, TailExperiment};

use crate::processes::InvariantMeasure;

/// Target set of a hitting time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// `{lo ≤ s_coord ≤ hi}` × everything else.
    Band {
        coord: usize,
        lo: f64,
        hi: f64,
    },
    Whole,
}

impl Region {
    pub fn contains(&self, state: &[f64]) -> bool {
        match self {
            Region::Band { coord, lo, hi } => (*lo..=*hi).contains(&state[*coord]),
            Region::Whole => true,
        }
    }

    /// `μ(U)` by quadrature on the marginal of the constrained coordinate.
    pub fn measure(&self, mu: &InvariantMeasure) -> f64 {
        match self {
            Region::Band { coord, lo, hi } => mu.expect_coordinate(
                *coord,
                |y| if (*lo..=*hi).contains(&y) { 1.0 } else { 0.0 },
                &[*lo, *hi],
            ),
            Region::Whole => 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::ProcessSpec;

    #[test]
    fn band_measure_under_rtorus() {
        let mu = InvariantMeasure::new(&ProcessSpec::rtorus()).unwrap();
        let band = Region::Band {
            coord: 0,
            lo: -1.0,
            hi: 1.0,
        };
        let m = band.measure(&mu);
        assert!(m > 0.3 && m < 0.8, "{m}");
        let left = Region::Band {
            coord: 0,
            lo: -1.0,
            hi: 0.0,
        }
        .measure(&mu);
        assert!((2.0 * left - m).abs() < 1e-10);
        assert_eq!(Region::Whole.measure(&mu), 1.0);
        assert!(band.contains(&[1.0, 3.0]) && !band.contains(&[1.01, 3.0]));
    }
}
