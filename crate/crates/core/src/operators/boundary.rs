use nalgebra::DMatrix;

use super::extension::HarmonicExtender;
use crate::error::{Error, Result};

/// Largest boundary dimension for which dense interface matrices are built.
pub const DENSE_BUDGET: usize = 4096;

const BLOCK: usize = 32;

/// Dense quadratic-form matrices of the boundary interface operators, in
/// boundary loop order.
#[derive(Clone, Debug)]
pub struct BoundaryOperatorSet {
    /// `(E φ_i, E φ_j)_{L²(Ω)}`.
    pub s_q: DMatrix<f64>,
    /// `(∇E φ_i, ∇E φ_j)`: the stiffness Schur complement on the boundary.
    pub schur: DMatrix<f64>,
    /// `schur + s_q`.
    pub f_q: DMatrix<f64>,
    /// Segment-wise extension energies on ring dofs (ring order).
    pub d_q: DMatrix<f64>,
    pub ring: Vec<usize>,
    pub corners: Vec<usize>,
    /// Lumped boundary mass.
    pub m_l: Vec<f64>,
}

impl BoundaryOperatorSet {
    pub fn build(ext: &HarmonicExtender) -> Result<Self> {
        let nb = ext.n_boundary();
        if nb > DENSE_BUDGET {
            return Err(Error::BudgetExceeded { size: nb, budget: DENSE_BUDGET });
        }
        let p1 = ext.p1();
        let bnd = p1.boundary.dofs_to_vertices();
        let int = p1.interior.dofs_to_vertices();
        let ni = int.len();
        let a_bb = p1.a_n.submatrix(bnd, bnd);
        let m_bb = p1.m_n.submatrix(bnd, bnd);
        let m_bi = p1.m_n.submatrix(bnd, int);

        let mut s_q = DMatrix::zeros(nb, nb);
        let mut schur = DMatrix::zeros(nb, nb);
        for c0 in (0..nb).step_by(BLOCK) {
            let k = BLOCK.min(nb - c0);
            // X = -A_II^{-1} A_IΓ[:, block]
            let mut x = vec![0.0; ni * k];
            for j in 0..k {
                let (cols, vals) = ext.a_bi.row(c0 + j);
                for (&i, &v) in cols.iter().zip(vals) {
                    x[j * ni + i] = -v;
                }
            }
            ext.interior_solver.solve_many(&mut x, k);
            // W = M_II X + M_IΓ[:, block], then Z = A_II^{-1} W.
            let mut z = vec![0.0; ni * k];
            for j in 0..k {
                let xj = &x[j * ni..(j + 1) * ni];
                let wj = &mut z[j * ni..(j + 1) * ni];
                p1.m_0.mul_vec_into(xj, wj);
                let (rows, vals) = m_bi.row(c0 + j);
                for (&i, &v) in rows.iter().zip(vals) {
                    wj[i] += v;
                }
            }
            ext.interior_solver.solve_many(&mut z, k);
            for j in 0..k {
                let c = c0 + j;
                let xj = &x[j * ni..(j + 1) * ni];
                let zj = &z[j * ni..(j + 1) * ni];
                let ax = ext.a_bi.mul_vec(xj);
                let az = ext.a_bi.mul_vec(zj);
                let mx = m_bi.mul_vec(xj);
                for i in 0..nb {
                    schur[(i, c)] = a_bb.get(i, c) + ax[i];
                    s_q[(i, c)] = m_bb.get(i, c) + mx[i] - az[i];
                }
            }
        }
        symmetrize(&mut s_q);
        symmetrize(&mut schur);
        let f_q = &schur + &s_q;

        let boundary = &p1.boundary;
        let ring = boundary.ring().to_vec();
        let corners = boundary.corners().to_vec();
        let mut d_q = DMatrix::zeros(ring.len(), ring.len());
        for (a, &i) in ring.iter().enumerate() {
            for (b, &j) in ring.iter().enumerate() {
                if boundary.segment_of(i) == boundary.segment_of(j) {
                    d_q[(a, b)] = schur[(i, j)];
                }
            }
        }
        Ok(Self { s_q, schur, f_q, d_q, ring, corners, m_l: p1.m_l.clone() })
    }

    pub fn dim(&self) -> usize {
        self.s_q.nrows()
    }

    /// `S_q λ`.
    pub fn s_apply(&self, lambda: &[f64]) -> Vec<f64> {
        let v = &self.s_q * nalgebra::DVector::from_column_slice(lambda);
        v.as_slice().to_vec()
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}
