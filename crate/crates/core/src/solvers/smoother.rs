use std::sync::Arc;

use crate::linalg::CsrMatrix;
use crate::operators::LinearMap;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SmootherKind {
    /// Forward then backward Gauss–Seidel, repeated `sweeps` times.
    SymmetricGaussSeidel { sweeps: usize },
    Jacobi { sweeps: usize, damping: f64 },
}

impl Default for SmootherKind {
    fn default() -> Self {
        Self::SymmetricGaussSeidel { sweeps: 3 }
    }
}

impl SmootherKind {
    pub fn jacobi(sweeps: usize) -> Self {
        Self::Jacobi { sweeps, damping: 0.7 }
    }
}

/// A few stationary sweeps on `A x = r` from a zero initial guess, viewed as
/// a map from residuals to corrections.
#[derive(Clone, Debug)]
pub struct Smoother {
    pub kind: SmootherKind,
    matrix: Arc<CsrMatrix>,
    inv_diag: Vec<f64>,
}

impl Smoother {
    pub fn new(matrix: Arc<CsrMatrix>, kind: SmootherKind) -> Self {
        let inv_diag = matrix.diagonal().iter().map(|d| 1.0 / d).collect();
        Self { kind, matrix, inv_diag }
    }

    fn relax(&self, x: &mut [f64], r: &[f64], i: usize) {
        let (cols, vals) = self.matrix.row(i);
        let mut s = r[i];
        for (&j, &v) in cols.iter().zip(vals) {
            s -= v * x[j];
        }
        x[i] += s * self.inv_diag[i];
    }
}

impl LinearMap for Smoother {
    fn dim_in(&self) -> usize {
        self.matrix.nrows()
    }

    fn dim_out(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply(&self, r: &[f64]) -> Vec<f64> {
        let n = r.len();
        let mut x = vec![0.0; n];
        match self.kind {
            SmootherKind::SymmetricGaussSeidel { sweeps } => {
                for _ in 0..sweeps {
                    for i in 0..n {
                        self.relax(&mut x, r, i);
                    }
                    for i in (0..n).rev() {
                        self.relax(&mut x, r, i);
                    }
                }
            }
            SmootherKind::Jacobi { sweeps, damping } => {
                let mut ax = vec![0.0; n];
                for _ in 0..sweeps {
                    self.matrix.mul_vec_into(&x, &mut ax);
                    for i in 0..n {
                        x[i] += damping * (r[i] - ax[i]) * self.inv_diag[i];
                    }
                }
            }
        }
        x
    }
}
