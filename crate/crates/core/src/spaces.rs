//! Degree-of-freedom maps for the P1, boundary-trace and Morley spaces.
//!
//! Numbering is deterministic: P1 dofs follow vertex order, boundary dofs
//! follow the counterclockwise boundary loop starting at the first corner, and
//! Morley dofs list the admissible vertices (vertex order) followed by the
//! admissible edges (edge order).

use nalgebra::{Matrix6, Vector6};

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum P1Variant {
    /// All vertices.
    Full,
    /// Interior vertices only (homogeneous Dirichlet).
    Interior,
}

#[derive(Clone, Debug)]
pub struct P1Space {
    pub variant: P1Variant,
    vertex_to_dof: Vec<Option<usize>>,
    dof_to_vertex: Vec<usize>,
}

impl P1Space {
    pub fn build(mesh: &Mesh, variant: P1Variant) -> Self {
        let mut vertex_to_dof = vec![None; mesh.n_vertices()];
        let mut dof_to_vertex = Vec::new();
        for v in 0..mesh.n_vertices() {
            if variant == P1Variant::Full || !mesh.is_boundary_vertex(v) {
                vertex_to_dof[v] = Some(dof_to_vertex.len());
                dof_to_vertex.push(v);
            }
        }
        Self { variant, vertex_to_dof, dof_to_vertex }
    }

    pub fn n_dofs(&self) -> usize {
        self.dof_to_vertex.len()
    }

    pub fn dof(&self, vertex: usize) -> Option<usize> {
        self.vertex_to_dof[vertex]
    }

    pub fn vertex(&self, dof: usize) -> usize {
        self.dof_to_vertex[dof]
    }

    pub fn dofs_to_vertices(&self) -> &[usize] {
        &self.dof_to_vertex
    }

    /// Nodal vector over all mesh vertices, zero where there is no dof.
    pub fn to_vertex_values(&self, coeffs: &[f64], n_vertices: usize) -> Vec<f64> {
        let mut out = vec![0.0; n_vertices];
        for (d, &v) in self.dof_to_vertex.iter().enumerate() {
            out[v] = coeffs[d];
        }
        out
    }

    pub fn interpolate(&self, mesh: &Mesh, f: impl Fn(Point) -> f64) -> Vec<f64> {
        self.dof_to_vertex.iter().map(|&v| f(mesh.vertices()[v])).collect()
    }
}

/// Trace space of P1 on the boundary, split into ring (non-corner) and
/// corner dofs.
#[derive(Clone, Debug)]
pub struct BoundarySpace {
    dof_to_vertex: Vec<usize>,
    vertex_to_dof: Vec<Option<usize>>,
    is_corner: Vec<bool>,
    ring: Vec<usize>,
    corner: Vec<usize>,
    /// Segment index of each ring dof; `None` for corners.
    segment: Vec<Option<usize>>,
    weights: Vec<f64>,
}

impl BoundarySpace {
    pub fn build(mesh: &Mesh) -> Self {
        let topo = mesh.boundary();
        let dof_to_vertex = topo.loop_vertices.clone();
        let n = dof_to_vertex.len();
        let mut vertex_to_dof = vec![None; mesh.n_vertices()];
        for (d, &v) in dof_to_vertex.iter().enumerate() {
            vertex_to_dof[v] = Some(d);
        }
        let mut is_corner = vec![false; n];
        for &c in &topo.corners {
            is_corner[vertex_to_dof[c].unwrap()] = true;
        }
        let mut segment = vec![None; n];
        for (s, seg) in topo.segments.iter().enumerate() {
            for &v in seg.interior_vertices() {
                segment[vertex_to_dof[v].unwrap()] = Some(s);
            }
        }
        let mut weights = vec![0.0; n];
        for (i, &e) in topo.loop_edges.iter().enumerate() {
            let half = mesh.edges()[e].length / 2.0;
            weights[i] += half;
            weights[(i + 1) % n] += half;
        }
        let ring = (0..n).filter(|&d| !is_corner[d]).collect();
        let corner = (0..n).filter(|&d| is_corner[d]).collect();
        Self { dof_to_vertex, vertex_to_dof, is_corner, ring, corner, segment, weights }
    }

    pub fn n_dofs(&self) -> usize {
        self.dof_to_vertex.len()
    }

    pub fn vertex(&self, dof: usize) -> usize {
        self.dof_to_vertex[dof]
    }

    pub fn dof(&self, vertex: usize) -> Option<usize> {
        self.vertex_to_dof[vertex]
    }

    pub fn dofs_to_vertices(&self) -> &[usize] {
        &self.dof_to_vertex
    }

    pub fn is_corner(&self, dof: usize) -> bool {
        self.is_corner[dof]
    }

    /// Ring dofs (non-corner), ascending.
    pub fn ring(&self) -> &[usize] {
        &self.ring
    }

    /// Corner dofs, ascending.
    pub fn corners(&self) -> &[usize] {
        &self.corner
    }

    pub fn segment_of(&self, dof: usize) -> Option<usize> {
        self.segment[dof]
    }

    /// Lumped boundary mass: half the summed lengths of the two boundary
    /// edges at each boundary vertex.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MorleyBc {
    /// Clamped plate: no dofs on the boundary at all.
    First,
    /// Simply supported plate: boundary vertex values vanish, boundary normal
    /// derivatives are free.
    Second,
    /// No constraints.
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DofSite {
    Vertex(usize),
    Edge(usize),
}

#[derive(Clone, Debug)]
pub struct MorleySpace {
    pub bc: MorleyBc,
    vertex_dof: Vec<Option<usize>>,
    edge_dof: Vec<Option<usize>>,
    sites: Vec<DofSite>,
}

impl MorleySpace {
    pub fn build(mesh: &Mesh, bc: MorleyBc) -> Self {
        let mut sites = Vec::new();
        let mut vertex_dof = vec![None; mesh.n_vertices()];
        for v in 0..mesh.n_vertices() {
            if bc == MorleyBc::Free || !mesh.is_boundary_vertex(v) {
                vertex_dof[v] = Some(sites.len());
                sites.push(DofSite::Vertex(v));
            }
        }
        let mut edge_dof = vec![None; mesh.n_edges()];
        for (e, edge) in mesh.edges().iter().enumerate() {
            if bc != MorleyBc::First || !edge.is_boundary() {
                edge_dof[e] = Some(sites.len());
                sites.push(DofSite::Edge(e));
            }
        }
        Self { bc, vertex_dof, edge_dof, sites }
    }

    pub fn n_dofs(&self) -> usize {
        self.sites.len()
    }

    pub fn site(&self, dof: usize) -> DofSite {
        self.sites[dof]
    }

    pub fn vertex_dof(&self, v: usize) -> Option<usize> {
        self.vertex_dof[v]
    }

    pub fn edge_dof(&self, e: usize) -> Option<usize> {
        self.edge_dof[e]
    }

    /// Degree of the nodal parameter: 0 for values, 1 for normal derivatives.
    pub fn degree(&self, dof: usize) -> usize {
        match self.sites[dof] {
            DofSite::Vertex(_) => 0,
            DofSite::Edge(_) => 1,
        }
    }

    /// Derivative direction of a degree-1 dof (the global edge normal).
    pub fn direction(&self, mesh: &Mesh, dof: usize) -> Option<Point> {
        match self.sites[dof] {
            DofSite::Vertex(_) => None,
            DofSite::Edge(e) => Some(mesh.edges()[e].normal),
        }
    }

    /// Global dofs of the six local functionals of triangle `t` (three
    /// vertices, then the edges opposite them); `None` where constrained.
    pub fn local_dofs(&self, mesh: &Mesh, t: usize) -> [Option<usize>; 6] {
        let tri = mesh.triangles()[t];
        let te = mesh.tri_edges(t);
        [
            self.vertex_dof[tri[0]],
            self.vertex_dof[tri[1]],
            self.vertex_dof[tri[2]],
            self.edge_dof[te[0]],
            self.edge_dof[te[1]],
            self.edge_dof[te[2]],
        ]
    }

    /// Local dof values on triangle `t` of the global coefficient vector.
    pub fn local_values(&self, mesh: &Mesh, t: usize, coeffs: &[f64]) -> [f64; 6] {
        self.local_dofs(mesh, t).map(|d| d.map_or(0.0, |d| coeffs[d]))
    }

    /// Morley interpolant: vertex values and edge-averaged normal derivatives
    /// of a function given with its gradient.
    pub fn interpolate(&self, mesh: &Mesh, f: impl Fn(Point) -> f64, grad: impl Fn(Point) -> Point) -> Vec<f64> {
        self.sites
            .iter()
            .map(|&s| match s {
                DofSite::Vertex(v) => f(mesh.vertices()[v]),
                DofSite::Edge(e) => {
                    let edge = &mesh.edges()[e];
                    let a = mesh.vertices()[edge.vertices[0]];
                    let b = mesh.vertices()[edge.vertices[1]];
                    // Simpson's rule is exact for the quadratic normal derivative of a cubic.
                    let m = edge.midpoint(mesh);
                    let dn = |p: Point| {
                        let g = grad(p);
                        g[0] * edge.normal[0] + g[1] * edge.normal[1]
                    };
                    (dn(a) + 4.0 * dn(m) + dn(b)) / 6.0
                }
            })
            .collect()
    }
}

/// Quadratic monomials in scaled local coordinates
/// `ξ = (x - x_c)/s`, `η = (y - y_c)/s`: `1, ξ, η, ξ², ξη, η²`.
#[derive(Clone, Copy, Debug)]
pub struct LocalFrame {
    pub center: Point,
    pub scale: f64,
}

impl LocalFrame {
    fn local(&self, p: Point) -> (f64, f64) {
        ((p[0] - self.center[0]) / self.scale, (p[1] - self.center[1]) / self.scale)
    }

    pub fn monomials(&self, p: Point) -> [f64; 6] {
        let (x, y) = self.local(p);
        [1.0, x, y, x * x, x * y, y * y]
    }

    pub fn monomial_gradients(&self, p: Point) -> [Point; 6] {
        let (x, y) = self.local(p);
        let s = 1.0 / self.scale;
        [[0.0, 0.0], [s, 0.0], [0.0, s], [2.0 * x * s, 0.0], [y * s, x * s], [0.0, 2.0 * y * s]]
    }

    /// Hessians `[h_xx, h_xy, h_yy]`.
    pub fn monomial_hessians(&self) -> [[f64; 3]; 6] {
        let s2 = 1.0 / (self.scale * self.scale);
        [[0.0; 3], [0.0; 3], [0.0; 3], [2.0 * s2, 0.0, 0.0], [0.0, s2, 0.0], [0.0, 0.0, 2.0 * s2]]
    }
}

/// The six Morley basis functions of one physical triangle, dual to
/// {vertex values, edge-averaged `∂/∂n_e`} with global edge normals.
#[derive(Clone, Debug)]
pub struct LocalMorleyBasis {
    pub frame: LocalFrame,
    /// `coeffs[i][k]`: coefficient of monomial `k` in basis function `i`.
    pub coeffs: [[f64; 6]; 6],
    pub vertices: [Point; 3],
    pub normals: [Point; 3],
    pub midpoints: [Point; 3],
}

impl LocalMorleyBasis {
    pub fn new(mesh: &Mesh, t: usize) -> Result<Self> {
        let vertices = mesh.triangle_points(t);
        let te = mesh.tri_edges(t);
        let normals = te.map(|e| mesh.edges()[e].normal);
        let midpoints = te.map(|e| mesh.edges()[e].midpoint(mesh));
        let center = [
            (vertices[0][0] + vertices[1][0] + vertices[2][0]) / 3.0,
            (vertices[0][1] + vertices[1][1] + vertices[2][1]) / 3.0,
        ];
        let frame = LocalFrame { center, scale: mesh.diameter(t) };
        let nodal = nodal_matrix(&frame, &vertices, &normals, &midpoints);
        let inv = nodal.transpose().try_inverse().ok_or(Error::DegenerateTriangle(t))?;
        let mut coeffs = [[0.0; 6]; 6];
        for i in 0..6 {
            for k in 0..6 {
                coeffs[i][k] = inv[(i, k)];
            }
        }
        let basis = Self { frame, coeffs, vertices, normals, midpoints };
        if basis.duality_residual() > 1e-10 {
            return Err(Error::DegenerateTriangle(t));
        }
        Ok(basis)
    }

    /// The six functionals applied to a quadratic given by monomial coefficients.
    pub fn functionals(&self, poly: &[f64; 6]) -> [f64; 6] {
        let mut out = [0.0; 6];
        for i in 0..3 {
            let m = self.frame.monomials(self.vertices[i]);
            out[i] = (0..6).map(|k| poly[k] * m[k]).sum();
            let g = self.frame.monomial_gradients(self.midpoints[i]);
            let n = self.normals[i];
            out[3 + i] = (0..6).map(|k| poly[k] * (g[k][0] * n[0] + g[k][1] * n[1])).sum();
        }
        out
    }

    /// `max |N_α(φ_i) - δ_{αi}|`.
    pub fn duality_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..6 {
            let f = self.functionals(&self.coeffs[i]);
            for (a, v) in f.iter().enumerate() {
                let target = if a == i { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }

    /// Monomial coefficients of `Σ_i values[i] φ_i`.
    pub fn combine(&self, values: &[f64; 6]) -> [f64; 6] {
        let mut out = [0.0; 6];
        for i in 0..6 {
            for k in 0..6 {
                out[k] += values[i] * self.coeffs[i][k];
            }
        }
        out
    }

    pub fn eval(&self, poly: &[f64; 6], p: Point) -> f64 {
        let m = self.frame.monomials(p);
        (0..6).map(|k| poly[k] * m[k]).sum()
    }

    pub fn value(&self, i: usize, p: Point) -> f64 {
        self.eval(&self.coeffs[i], p)
    }

    pub fn gradient(&self, i: usize, p: Point) -> Point {
        let g = self.frame.monomial_gradients(p);
        let mut out = [0.0; 2];
        for k in 0..6 {
            out[0] += self.coeffs[i][k] * g[k][0];
            out[1] += self.coeffs[i][k] * g[k][1];
        }
        out
    }

    /// Constant Hessian `[h_xx, h_xy, h_yy]` of basis function `i`.
    pub fn hessian(&self, i: usize) -> [f64; 3] {
        let h = self.frame.monomial_hessians();
        let mut out = [0.0; 3];
        for k in 0..6 {
            for c in 0..3 {
                out[c] += self.coeffs[i][k] * h[k][c];
            }
        }
        out
    }
}

fn nodal_matrix(frame: &LocalFrame, vertices: &[Point; 3], normals: &[Point; 3], midpoints: &[Point; 3]) -> Matrix6<f64> {
    let mut n = Matrix6::zeros();
    for i in 0..3 {
        let m = frame.monomials(vertices[i]);
        n.set_row(i, &Vector6::from_row_slice(&m).transpose());
        let g = frame.monomial_gradients(midpoints[i]);
        for k in 0..6 {
            n[(3 + i, k)] = g[k][0] * normals[i][0] + g[k][1] * normals[i][1];
        }
    }
    n
}

/// Hessian double-dot product `H_a : H_b` for `[h_xx, h_xy, h_yy]` triples.
#[inline]
pub fn hessian_dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + 2.0 * a[1] * b[1] + a[2] * b[2]
}
