use super::CsrMatrix;
use crate::{Error, Result};

/// LU factorization of a banded matrix without pivoting.
///
/// Fill-in stays inside the band. Intended for nonsingular M-matrices and
/// diagonally dominant systems, where elimination without pivoting is stable.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    lower: usize,
    upper: usize,
    data: Vec<f64>,
    min_pivot: f64,
    min_signed_pivot: f64,
}

impl BandedLu {
    fn width(&self) -> usize {
        self.lower + self.upper + 1
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width() + (j + self.lower - i)
    }

    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(Error::Solver("banded LU needs a square matrix".into()));
        }
        let (lower, upper) = a.bandwidths();
        let mut lu = BandedLu {
            n,
            lower,
            upper,
            data: vec![0.0; n * (lower + upper + 1)],
            min_pivot: f64::INFINITY,
            min_signed_pivot: f64::INFINITY,
        };
        for (r, c, v) in a.triplets() {
            let k = lu.idx(r, c);
            lu.data[k] += v;
        }
        let scale = lu
            .data
            .iter()
            .fold(0.0_f64, |m, x| m.max(x.abs()))
            .max(f64::MIN_POSITIVE);
        for k in 0..n {
            let pivot = lu.data[lu.idx(k, k)];
            if !pivot.is_finite() || pivot.abs() <= 1e-14 * scale {
                return Err(Error::Solver(format!("zero pivot {pivot:e} at row {k}")));
            }
            lu.min_pivot = lu.min_pivot.min(pivot.abs());
            lu.min_signed_pivot = lu.min_signed_pivot.min(pivot);
            let row_end = (k + upper).min(n - 1);
            for i in k + 1..=(k + lower).min(n - 1) {
                let ik = lu.idx(i, k);
                let l = lu.data[ik] / pivot;
                if l == 0.0 {
                    continue;
                }
                lu.data[ik] = l;
                for j in k + 1..=row_end {
                    let kj = lu.idx(k, j);
                    let ij = lu.idx(i, j);
                    lu.data[ij] -= l * lu.data[kj];
                }
            }
        }
        Ok(lu)
    }

    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    /// Smallest pivot with sign; positive for every nonsingular M-matrix.
    pub fn min_signed_pivot(&self) -> f64 {
        self.min_signed_pivot
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut x = b.to_vec();
        for i in 0..self.n {
            let start = i.saturating_sub(self.lower);
            let mut s = x[i];
            for j in start..i {
                s -= self.data[self.idx(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..self.n).rev() {
            let end = (i + self.upper).min(self.n - 1);
            let mut s = x[i];
            for j in i + 1..=end {
                s -= self.data[self.idx(i, j)] * x[j];
            }
            x[i] = s / self.data[self.idx(i, i)];
        }
        x
    }
}
