//! Solvers for the SPD P1 systems (stiffness and mass) that every
//! preconditioner reduces to.

use crate::error::{Error, Result};
use crate::linalg::vector::{axpy, dot, norm};
use crate::linalg::{CsrMatrix, SparseCholesky};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PoissonKind {
    Direct,
    /// Jacobi-preconditioned CG to the given relative residual.
    Iterative { tol: f64 },
}

#[derive(Clone, Debug)]
pub enum PoissonBackend {
    Direct(SparseCholesky),
    Iterative { matrix: CsrMatrix, inv_diag: Vec<f64>, tol: f64 },
}

impl PoissonBackend {
    pub fn new(matrix: &CsrMatrix, kind: PoissonKind) -> Result<Self> {
        match kind {
            PoissonKind::Direct => Ok(Self::Direct(SparseCholesky::factor(matrix)?)),
            PoissonKind::Iterative { tol } => {
                let diag = matrix.diagonal();
                if let Some((i, &d)) = diag.iter().enumerate().find(|(_, d)| !(**d > 0.0)) {
                    return Err(Error::NotPositiveDefinite { pivot: i, value: d });
                }
                Ok(Self::Iterative {
                    matrix: matrix.clone(),
                    inv_diag: diag.iter().map(|d| 1.0 / d).collect(),
                    tol,
                })
            }
        }
    }

    pub fn direct(matrix: &CsrMatrix) -> Result<Self> {
        Self::new(matrix, PoissonKind::Direct)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Direct(f) => f.dim(),
            Self::Iterative { matrix, .. } => matrix.nrows(),
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        match self {
            Self::Direct(f) => f.solve(b),
            Self::Iterative { matrix, inv_diag, tol } => jacobi_cg(matrix, inv_diag, b, *tol),
        }
    }

    /// Solves for `k` right-hand sides stored column-major.
    pub fn solve_many(&self, rhs: &mut [f64], k: usize) {
        match self {
            Self::Direct(f) => f.solve_many(rhs, k),
            Self::Iterative { .. } => {
                let n = self.dim();
                for c in 0..k {
                    let x = self.solve(&rhs[c * n..(c + 1) * n]);
                    rhs[c * n..(c + 1) * n].copy_from_slice(&x);
                }
            }
        }
    }
}

fn jacobi_cg(a: &CsrMatrix, inv_diag: &[f64], b: &[f64], tol: f64) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return x;
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for _ in 0..10 * n.max(10) {
        a.mul_vec_into(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        if norm(&r) <= tol * bnorm {
            break;
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    x
}
