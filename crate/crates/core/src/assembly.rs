//! Sparse matrix and load-vector assembly.
//!
//! P1 matrices use the interior-vertex space for the Dirichlet variants and
//! the full vertex space (dof = vertex index) for the Neumann variants. The
//! Morley stiffness integrates constant Hessians exactly, so no quadrature is
//! involved there.

use crate::error::Result;
use crate::linalg::{CsrMatrix, TripletBuilder};
use crate::mesh::{Mesh, Point};
use crate::spaces::{hessian_dot, BoundarySpace, LocalMorleyBasis, MorleySpace, P1Space, P1Variant};

/// Seven-point symmetric triangle rule, exact for polynomials of degree 5.
/// Entries are (barycentric coordinates, weight relative to the area).
pub fn triangle_rule7() -> [([f64; 3], f64); 7] {
    let a1 = 0.059_715_871_789_769_82;
    let b1 = 0.470_142_064_105_115_1;
    let a2 = 0.797_426_985_353_087_3;
    let b2 = 0.101_286_507_323_456_3;
    let w0 = 0.225;
    let w1 = 0.132_394_152_788_506_2;
    let w2 = 0.125_939_180_544_827_1;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], w0),
        ([a1, b1, b1], w1),
        ([b1, a1, b1], w1),
        ([b1, b1, a1], w1),
        ([a2, b2, b2], w2),
        ([b2, a2, b2], w2),
        ([b2, b2, a2], w2),
    ]
}

pub fn barycentric_point(pts: &[Point; 3], bary: &[f64; 3]) -> Point {
    [
        bary[0] * pts[0][0] + bary[1] * pts[1][0] + bary[2] * pts[2][0],
        bary[0] * pts[0][1] + bary[1] * pts[1][1] + bary[2] * pts[2][1],
    ]
}

/// The P1 matrices that every preconditioner in this crate is built from.
#[derive(Clone, Debug)]
pub struct P1Matrices {
    pub full: P1Space,
    pub interior: P1Space,
    pub boundary: BoundarySpace,
    /// Stiffness on all vertices.
    pub a_n: CsrMatrix,
    /// Stiffness on interior vertices.
    pub a_d: CsrMatrix,
    /// Stiffness coupling: rows all vertices, columns interior vertices.
    pub a_mix: CsrMatrix,
    /// Mass on all vertices.
    pub m_n: CsrMatrix,
    /// Mass on interior vertices.
    pub m_0: CsrMatrix,
    /// Lumped boundary mass (diagonal, boundary loop order).
    pub m_l: Vec<f64>,
}

impl P1Matrices {
    pub fn assemble(mesh: &Mesh) -> Self {
        let full = P1Space::build(mesh, P1Variant::Full);
        let interior = P1Space::build(mesh, P1Variant::Interior);
        let boundary = BoundarySpace::build(mesh);
        let (a_n, m_n) = assemble_full(mesh);
        let int = interior.dofs_to_vertices();
        let all: Vec<usize> = (0..mesh.n_vertices()).collect();
        let a_d = a_n.submatrix(int, int);
        let a_mix = a_n.submatrix(&all, int);
        let m_0 = m_n.submatrix(int, int);
        let m_l = boundary.weights().to_vec();
        Self { full, interior, boundary, a_n, a_d, a_mix, m_n, m_0, m_l }
    }

    /// Zero-extension of interior coefficients to all vertices.
    pub fn extend_by_zero(&self, interior: &[f64]) -> Vec<f64> {
        self.interior.to_vertex_values(interior, self.full.n_dofs())
    }

    /// Restriction of a vertex vector to the interior vertices.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.interior.dofs_to_vertices().iter().map(|&v| full[v]).collect()
    }
}

fn assemble_full(mesh: &Mesh) -> (CsrMatrix, CsrMatrix) {
    let n = mesh.n_vertices();
    let mut a = TripletBuilder::with_capacity(n, n, 9 * mesh.n_triangles());
    let mut m = TripletBuilder::with_capacity(n, n, 9 * mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let tri = mesh.triangles()[t];
        let g = mesh.p1_gradients(t);
        let area = mesh.area(t);
        for i in 0..3 {
            for j in 0..3 {
                a.push(tri[i], tri[j], area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]));
                let mass = if i == j { area / 6.0 } else { area / 12.0 };
                m.push(tri[i], tri[j], mass);
            }
        }
    }
    (a.build(), m.build())
}

/// Element stiffness `|T| H_i : H_j` of the six local Morley basis functions.
pub fn morley_element_stiffness(mesh: &Mesh, basis: &LocalMorleyBasis, t: usize) -> [[f64; 6]; 6] {
    let area = mesh.area(t);
    let h: [[f64; 3]; 6] = std::array::from_fn(|i| basis.hessian(i));
    let mut k = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            k[i][j] = area * hessian_dot(&h[i], &h[j]);
        }
    }
    k
}

/// Broken-Hessian stiffness `Σ_T ∫_T ∇²φ_i : ∇²φ_j` on the given Morley space.
pub fn assemble_morley(mesh: &Mesh, space: &MorleySpace) -> Result<CsrMatrix> {
    let n = space.n_dofs();
    let mut b = TripletBuilder::with_capacity(n, n, 36 * mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let basis = LocalMorleyBasis::new(mesh, t)?;
        let k = morley_element_stiffness(mesh, &basis, t);
        let dofs = space.local_dofs(mesh, t);
        for i in 0..6 {
            let Some(di) = dofs[i] else { continue };
            for j in 0..6 {
                if let Some(dj) = dofs[j] {
                    b.push(di, dj, k[i][j]);
                }
            }
        }
    }
    Ok(b.build())
}

/// `(f, φ_i)` for the P1 basis of `space`.
pub fn load_vector_p1(mesh: &Mesh, space: &P1Space, f: impl Fn(Point) -> f64) -> Vec<f64> {
    let rule = triangle_rule7();
    let mut out = vec![0.0; space.n_dofs()];
    for t in 0..mesh.n_triangles() {
        let pts = mesh.triangle_points(t);
        let area = mesh.area(t);
        let tri = mesh.triangles()[t];
        for (bary, w) in &rule {
            let fx = f(barycentric_point(&pts, bary)) * w * area;
            for i in 0..3 {
                if let Some(d) = space.dof(tri[i]) {
                    out[d] += fx * bary[i];
                }
            }
        }
    }
    out
}

/// `(f, φ_i)` for the Morley basis of `space`.
pub fn load_vector_morley(mesh: &Mesh, space: &MorleySpace, f: impl Fn(Point) -> f64) -> Result<Vec<f64>> {
    let rule = triangle_rule7();
    let mut out = vec![0.0; space.n_dofs()];
    for t in 0..mesh.n_triangles() {
        let basis = LocalMorleyBasis::new(mesh, t)?;
        let pts = mesh.triangle_points(t);
        let area = mesh.area(t);
        let dofs = space.local_dofs(mesh, t);
        for (bary, w) in &rule {
            let x = barycentric_point(&pts, bary);
            let fx = f(x) * w * area;
            for i in 0..6 {
                if let Some(d) = dofs[i] {
                    out[d] += fx * basis.value(i, x);
                }
            }
        }
    }
    Ok(out)
}

/// `‖w‖²_{0,T}` of the Morley function with local dof values `values`.
pub fn morley_l2_squared_on(mesh: &Mesh, basis: &LocalMorleyBasis, t: usize, values: &[f64; 6]) -> f64 {
    let poly = basis.combine(values);
    let pts = mesh.triangle_points(t);
    let area = mesh.area(t);
    triangle_rule7()
        .iter()
        .map(|(bary, w)| {
            let v = basis.eval(&poly, barycentric_point(&pts, bary));
            w * area * v * v
        })
        .sum()
}

/// `Σ_e h_e^{-1} ∫_e ⟦∂p/∂n_e⟧²` for interior P1 coefficients `p`.
///
/// `kind == 1` sums over all edges, `kind == 2` over interior edges only. The
/// jump of a P1 function is constant per edge, so each term is the squared
/// jump.
pub fn jump_seminorm(mesh: &Mesh, interior: &P1Space, p: &[f64], kind: u8) -> f64 {
    let values = interior.to_vertex_values(p, mesh.n_vertices());
    let grads: Vec<Point> = (0..mesh.n_triangles()).map(|t| mesh.p1_gradient_of(t, &values)).collect();
    let mut sum = 0.0;
    for (e, edge) in mesh.edges().iter().enumerate() {
        if edge.is_boundary() && kind == 2 {
            continue;
        }
        let frame = mesh.edge_jump_frame(e);
        let j = frame.jump(grads[frame.left], frame.right.map(|r| grads[r]));
        sum += j * j;
    }
    sum
}
