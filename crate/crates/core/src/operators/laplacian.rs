use std::sync::Arc;

use crate::assembly::P1Matrices;
use crate::error::Result;
use crate::linalg::vector::dot;
use crate::linalg::SparseCholesky;

/// The two discrete Laplacians on interior P1 functions.
///
/// The first kind tests against all of `V_h` and returns a full vertex vector,
/// the second kind tests against interior functions only.
#[derive(Clone, Debug)]
pub struct DiscreteLaplacians {
    p1: Arc<P1Matrices>,
    mass_full: SparseCholesky,
    mass_interior: SparseCholesky,
}

impl DiscreteLaplacians {
    pub fn new(p1: Arc<P1Matrices>) -> Result<Self> {
        let mass_full = SparseCholesky::factor(&p1.m_n)?;
        let mass_interior = SparseCholesky::factor(&p1.m_0)?;
        Ok(Self { p1, mass_full, mass_interior })
    }

    /// `-Δ_{h,k} w` as nodal coefficients.
    pub fn neg_apply(&self, kind: u8, w: &[f64]) -> Vec<f64> {
        match kind {
            1 => self.mass_full.solve(&self.p1.a_mix.mul_vec(w)),
            2 => self.mass_interior.solve(&self.p1.a_d.mul_vec(w)),
            _ => panic!("discrete Laplacian kind must be 1 or 2, got {kind}"),
        }
    }

    /// `‖Δ_{h,k} w‖²_{0,Ω}`.
    pub fn norm_squared(&self, kind: u8, w: &[f64]) -> f64 {
        let v = self.neg_apply(kind, w);
        let m = if kind == 1 { &self.p1.m_n } else { &self.p1.m_0 };
        dot(&v, &m.mul_vec(&v))
    }

    /// L² projection of a full vertex function onto `V_h0`.
    pub fn project_interior(&self, full: &[f64]) -> Vec<f64> {
        self.mass_interior.solve(&self.p1.restrict(&self.p1.m_n.mul_vec(full)))
    }

    pub fn p1(&self) -> &P1Matrices {
        &self.p1
    }
}
