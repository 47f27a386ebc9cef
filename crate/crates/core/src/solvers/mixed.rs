use std::sync::Arc;

use nalgebra::{Cholesky, DVector, Dyn};

use super::interface::{InterfaceKind, InterfacePreconditioner};
use super::pcg::{pcg, PcgOptions};
use crate::error::{Error, Result};
use crate::linalg::vector::add;
use crate::operators::{BoundaryOperatorSet, HarmonicExtender};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InterfaceMode {
    /// Cholesky of the dense Gram matrix.
    Dense,
    /// PCG on the Gram matrix with an interface preconditioner.
    Nested { kind: InterfaceKind, tol: f64 },
}

impl Default for InterfaceMode {
    fn default() -> Self {
        Self::Dense
    }
}

#[derive(Clone, Debug)]
enum InterfaceSolve {
    Dense(Cholesky<f64, Dyn>),
    Nested { pc: InterfacePreconditioner, tol: f64 },
}

/// Inverse of `A_mixᵀ M_N^{-1} A_mix` on interior P1 functions through two
/// Dirichlet solves and one boundary solve.
#[derive(Clone, Debug)]
pub struct MixedInverse {
    ext: Arc<HarmonicExtender>,
    ops: Arc<BoundaryOperatorSet>,
    solve: InterfaceSolve,
}

/// The pieces of one decoupled solve.
#[derive(Clone, Debug)]
pub struct MixedSolution {
    pub u: Vec<f64>,
    /// Auxiliary full vertex function `w + Eλ`.
    pub auxiliary: Vec<f64>,
    pub lambda: Vec<f64>,
    pub interface_iterations: usize,
}

impl MixedInverse {
    pub fn new(ext: Arc<HarmonicExtender>, ops: Arc<BoundaryOperatorSet>, mode: InterfaceMode, h: f64) -> Result<Self> {
        let solve = match mode {
            InterfaceMode::Dense => InterfaceSolve::Dense(
                ops.s_q.clone().cholesky().ok_or(Error::NotPositiveDefinite { pivot: 0, value: f64::NAN })?,
            ),
            InterfaceMode::Nested { kind, tol } => {
                InterfaceSolve::Nested { pc: InterfacePreconditioner::new(kind, &ops, h), tol }
            }
        };
        Ok(Self { ext, ops, solve })
    }

    pub fn dim(&self) -> usize {
        self.ext.p1().a_d.nrows()
    }

    pub fn solve(&self, g: &[f64]) -> Result<MixedSolution> {
        let p1 = self.ext.p1();
        let solver = self.ext.interior_solver();
        let w = p1.extend_by_zero(&solver.solve(g));
        let rhs: Vec<f64> = self.ext.adjoint(&p1.m_n.mul_vec(&w)).iter().map(|v| -v).collect();
        let (lambda, iters) = match &self.solve {
            InterfaceSolve::Dense(chol) => (chol.solve(&DVector::from_column_slice(&rhs)).as_slice().to_vec(), 0),
            InterfaceSolve::Nested { pc, tol } => {
                let opts = PcgOptions { tol: *tol, max_iter: 10 * rhs.len().max(10), ..PcgOptions::default() };
                let out = pcg(&self.ops.s_q, pc, &rhs, &opts)?;
                if !out.converged {
                    return Err(Error::NoConvergence(format!(
                        "interface solve stalled at relative residual {:e}",
                        out.residual_history.last().unwrap()
                    )));
                }
                (out.solution, out.iterations)
            }
        };
        let auxiliary = add(&w, &self.ext.extend(&lambda));
        let u = solver.solve(&p1.restrict(&p1.m_n.mul_vec(&auxiliary)));
        Ok(MixedSolution { u, auxiliary, lambda, interface_iterations: iters })
    }
}
