use serde::{Deserialize, Serialize};

use super::measure::InvariantMeasure;

/// An observable depending on at most one state coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observable {
    Constant {
        value: f64,
    },
    Cos {
        coord: usize,
    },
    Sin {
        coord: usize,
    },
    /// Unbounded; used for moment checks only.
    Square {
        coord: usize,
    },
    /// `weight · 1{lo ≤ y ≤ hi}`.
    Indicator {
        coord: usize,
        lo: f64,
        hi: f64,
        weight: f64,
    },
    Scaled {
        factor: f64,
        inner: Box<Observable>,
    },
}

impl Observable {
    pub fn negated(&self) -> Observable {
        match self {
            Observable::Scaled { factor, inner } => Observable::Scaled {
                factor: -factor,
                inner: inner.clone(),
            },
            other => Observable::Scaled {
                factor: -1.0,
                inner: Box::new(other.clone()),
            },
        }
    }

    pub fn coord(&self) -> Option<usize> {
        match self {
            Observable::Constant { .. } => None,
            Observable::Cos { coord }
            | Observable::Sin { coord }
            | Observable::Square { coord }
            | Observable::Indicator { coord, .. } => Some(*coord),
            Observable::Scaled { inner, .. } => inner.coord(),
        }
    }

    /// The observable as a function of its single coordinate.
    pub fn eval_coord(&self, y: f64) -> f64 {
        match self {
            Observable::Constant { value } => *value,
            Observable::Cos { .. } => y.cos(),
            Observable::Sin { .. } => y.sin(),
            Observable::Square { .. } => y * y,
            Observable::Indicator { lo, hi, weight, .. } => {
                if *lo <= y && y <= *hi {
                    *weight
                } else {
                    0.0
                }
            }
            Observable::Scaled { factor, inner } => factor * inner.eval_coord(y),
        }
    }

    pub fn eval(&self, state: &[f64]) -> f64 {
        self.eval_coord(self.coord().map_or(0.0, |c| state[c]))
    }

    /// `‖V‖∞`, or `None` when unbounded.
    pub fn sup_norm(&self) -> Option<f64> {
        match self {
            Observable::Constant { value } => Some(value.abs()),
            Observable::Cos { .. } | Observable::Sin { .. } => Some(1.0),
            Observable::Square { .. } => None,
            Observable::Indicator { weight, .. } => Some(weight.abs()),
            Observable::Scaled { factor, inner } => inner.sup_norm().map(|s| s * factor.abs()),
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Observable::Indicator { lo, hi, .. } => vec![*lo, *hi],
            Observable::Scaled { inner, .. } => inner.breakpoints(),
            _ => Vec::new(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Observable::Constant { value } => format!("const({value})"),
            Observable::Cos { coord } => format!("cos(s{coord})"),
            Observable::Sin { coord } => format!("sin(s{coord})"),
            Observable::Square { coord } => format!("sq(s{coord})"),
            Observable::Indicator { coord, lo, hi, weight } => format!("{weight}*1[{lo}<=s{coord}<={hi}]"),
            Observable::Scaled { factor, inner } => format!("{factor}*{}", inner.name()),
        }
    }

    /// `μV` by quadrature against the invariant marginal.
    pub fn mean(&self, mu: &InvariantMeasure) -> f64 {
        match self.coord() {
            None => self.eval_coord(0.0),
            Some(c) => mu.expect_coordinate(c, |y| self.eval_coord(y), &self.breakpoints()),
        }
    }

    /// `‖V‖₂ = (μV²)^{1/2}`.
    pub fn l2_norm(&self, mu: &InvariantMeasure) -> f64 {
        let second = match self.coord() {
            None => self.eval_coord(0.0).powi(2),
            Some(c) => mu.expect_coordinate(c, |y| self.eval_coord(y).powi(2), &self.breakpoints()),
        };
        second.max(0.0).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::ProcessSpec;

    #[test]
    fn cos_of_angle_under_rtorus_measure() {
        let mu = InvariantMeasure::new(&ProcessSpec::rtorus()).unwrap();
        let v = Observable::Cos { coord: 1 };
        assert!(v.mean(&mu).abs() < 1e-12);
        assert!((v.l2_norm(&mu) - 0.5_f64.sqrt()).abs() < 1e-12);
        assert_eq!(v.sup_norm(), Some(1.0));
    }

    #[test]
    fn negation_flips_values() {
        let v = Observable::Indicator {
            coord: 0,
            lo: -1.0,
            hi: 1.0,
            weight: 1.0,
        };
        let n = v.negated();
        assert_eq!(n.eval(&[0.5, 0.0]), -1.0);
        assert_eq!(n.negated().eval(&[0.5, 0.0]), 1.0);
        assert_eq!(n.sup_norm(), Some(1.0));
    }
}
