use std::sync::Arc;

use crate::assembly::P1Matrices;
use crate::linalg::CsrMatrix;
use crate::solvers::PoissonBackend;

/// Discrete harmonic extension of boundary data into `V_h`.
///
/// Boundary coefficients follow the boundary loop order, interior
/// coefficients the interior P1 order, so the interior block of the
/// stiffness is exactly the Dirichlet stiffness and its factorization is
/// shared with the Poisson solves.
#[derive(Clone, Debug)]
pub struct HarmonicExtender {
    pub(crate) p1: Arc<P1Matrices>,
    pub(crate) interior_solver: Arc<PoissonBackend>,
    /// Stiffness block, boundary rows by interior columns.
    pub(crate) a_bi: CsrMatrix,
}

impl HarmonicExtender {
    pub fn new(p1: Arc<P1Matrices>, interior_solver: Arc<PoissonBackend>) -> Self {
        let bnd = p1.boundary.dofs_to_vertices();
        let a_bi = p1.a_n.submatrix(bnd, p1.interior.dofs_to_vertices());
        Self { p1, interior_solver, a_bi }
    }

    pub fn n_boundary(&self) -> usize {
        self.p1.boundary.n_dofs()
    }

    pub fn n_vertices(&self) -> usize {
        self.p1.full.n_dofs()
    }

    pub fn p1(&self) -> &P1Matrices {
        &self.p1
    }

    pub fn interior_solver(&self) -> &PoissonBackend {
        &self.interior_solver
    }

    /// Interior values `-A_II^{-1} A_IΓ λ`.
    pub fn interior_part(&self, lambda: &[f64]) -> Vec<f64> {
        let mut rhs = self.a_bi.tr_mul_vec(lambda);
        rhs.iter_mut().for_each(|v| *v = -*v);
        self.interior_solver.solve(&rhs)
    }

    /// Full vertex vector of the extension of `lambda`.
    pub fn extend(&self, lambda: &[f64]) -> Vec<f64> {
        assert_eq!(lambda.len(), self.n_boundary());
        let interior = self.interior_part(lambda);
        self.assemble_full(&interior, lambda)
    }

    pub(crate) fn assemble_full(&self, interior: &[f64], lambda: &[f64]) -> Vec<f64> {
        let mut u = self.p1.extend_by_zero(interior);
        for (d, &v) in self.p1.boundary.dofs_to_vertices().iter().enumerate() {
            u[v] = lambda[d];
        }
        u
    }

    /// Adjoint of extension: `Eᵀ y = y_Γ - A_ΓI A_II^{-1} y_I` for a full
    /// vertex (dual) vector `y`.
    pub fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        let z = self.interior_solver.solve(&self.p1.restrict(y));
        let coupling = self.a_bi.mul_vec(&z);
        self.p1
            .boundary
            .dofs_to_vertices()
            .iter()
            .zip(coupling)
            .map(|(&v, c)| y[v] - c)
            .collect()
    }

    /// `Eᵀ M_N E λ`: the boundary Gram form of the extensions, matrix-free.
    pub fn s_apply(&self, lambda: &[f64]) -> Vec<f64> {
        let u = self.extend(lambda);
        self.adjoint(&self.p1.m_n.mul_vec(&u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector::{dot, random_vector};
    use crate::mesh::{Domain, Mesh};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn extender(domain: Domain, level: usize) -> HarmonicExtender {
        let mesh = Mesh::build_domain(domain, level);
        let p1 = Arc::new(P1Matrices::assemble(&mesh));
        let solver = Arc::new(PoissonBackend::direct(&p1.a_d).unwrap());
        HarmonicExtender::new(p1, solver)
    }

    #[test]
    fn constants_and_linears_are_harmonic() {
        let mesh = Mesh::build_domain(Domain::Trident, 2);
        let ext = extender(Domain::Trident, 2);
        let u = ext.extend(&vec![1.0; ext.n_boundary()]);
        assert!(u.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let f = |p: [f64; 2]| 0.5 - 2.0 * p[0] + p[1];
        let lambda: Vec<f64> =
            ext.p1().boundary.dofs_to_vertices().iter().map(|&v| f(mesh.vertices()[v])).collect();
        let u = ext.extend(&lambda);
        for (v, p) in mesh.vertices().iter().enumerate() {
            assert!((u[v] - f(*p)).abs() < 1e-11);
        }
    }

    #[test]
    fn extension_minimizes_energy() {
        let ext = extender(Domain::Hexagon, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let lambda = random_vector(&mut rng, ext.n_boundary());
        let u = ext.extend(&lambda);
        let a = &ext.p1().a_n;
        let residual = ext.p1().restrict(&a.mul_vec(&u));
        assert!(residual.iter().all(|r| r.abs() < 1e-10));
        let naive = ext.assemble_full(&vec![0.0; ext.p1().a_d.nrows()], &lambda);
        assert!(dot(&u, &a.mul_vec(&u)) < dot(&naive, &a.mul_vec(&naive)));
    }

    #[test]
    fn gram_of_constant_is_area() {
        let mesh = Mesh::build_domain(Domain::LShape, 2);
        let ext = extender(Domain::LShape, 2);
        let ones = vec![1.0; ext.n_boundary()];
        let s = ext.s_apply(&ones);
        assert!((dot(&ones, &s) - mesh.total_area()).abs() < 1e-11);
    }
}
