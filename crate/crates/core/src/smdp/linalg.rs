use faer::prelude::*;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Error, Result};

/// Sparse square matrix kept in triplet form, with an LU factorization.
pub(crate) struct SparseSystem {
    n: usize,
    triplets: Vec<Triplet<usize, usize, f64>>,
    lu: Lu<usize, f64>,
}

impl SparseSystem {
    pub fn factor(n: usize, triplets: Vec<Triplet<usize, usize, f64>>) -> Result<Self> {
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| Error::Singular(format!("matrix assembly failed: {e:?}")))?;
        let lu = mat.sp_lu().map_err(|e| Error::Singular(format!("LU failed: {e:?}")))?;
        Ok(SparseSystem { n, triplets, lu })
    }

    fn mul(&self, x: &[f64], transpose: bool) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for t in &self.triplets {
            if transpose {
                y[t.col] += t.val * x[t.row];
            } else {
                y[t.row] += t.val * x[t.col];
            }
        }
        y
    }

    fn raw_solve(&self, rhs: &[f64], transpose: bool) -> Vec<f64> {
        let mut x = Mat::<f64>::from_fn(self.n, 1, |i, _| rhs[i]);
        if transpose {
            self.lu.solve_transpose_in_place(x.as_mut());
        } else {
            self.lu.solve_in_place(x.as_mut());
        }
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }

    /// Solve with a few rounds of iterative refinement; returns the solution
    /// and the final max-abs residual.
    pub fn solve(&self, rhs: &[f64], transpose: bool) -> Result<(Vec<f64>, f64)> {
        let mut x = self.raw_solve(rhs, transpose);
        let mut res = residual(&self.mul(&x, transpose), rhs);
        for _ in 0..3 {
            if !res.1.is_finite() {
                break;
            }
            let dx = self.raw_solve(&res.0, transpose);
            let cand: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
            let next = residual(&self.mul(&cand, transpose), rhs);
            if next.1 < res.1 {
                x = cand;
                res = next;
            } else {
                break;
            }
        }
        if !res.1.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular("linear solve produced non-finite values".into()));
        }
        Ok((x, res.1))
    }
}

fn residual(ax: &[f64], b: &[f64]) -> (Vec<f64>, f64) {
    let r: Vec<f64> = b.iter().zip(ax).map(|(b, a)| b - a).collect();
    let m = r.iter().fold(0.0f64, |acc, v| if v.is_nan() { f64::NAN } else { acc.max(v.abs()) });
    (r, m)
}
