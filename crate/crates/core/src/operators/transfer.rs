use crate::linalg::{CsrMatrix, TripletBuilder};
use crate::mesh::Mesh;
use crate::spaces::{DofSite, MorleySpace, P1Space};

/// Morley to interior P1: keeps the vertex values. Rows follow `interior`,
/// columns follow `morley`.
///
/// The patch average of per-triangle vertex values reduces to the vertex dof
/// itself because Morley functions are continuous at vertices.
pub fn vertex_injection(morley: &MorleySpace, interior: &P1Space) -> CsrMatrix {
    let mut b = TripletBuilder::new(interior.n_dofs(), morley.n_dofs());
    for (d, &v) in interior.dofs_to_vertices().iter().enumerate() {
        if let Some(m) = morley.vertex_dof(v) {
            b.push(d, m, 1.0);
        }
    }
    b.build()
}

/// Interior P1 to Morley: vertex values are copied and each edge dof is the
/// average over the adjacent triangles of `∇(p|_T)·n_e`.
///
/// Which boundary sites carry a dof is decided by `morley`: none for the
/// clamped space, one-sided normal derivatives on boundary edges for the
/// simply supported one.
pub fn p1_to_morley(mesh: &Mesh, morley: &MorleySpace, interior: &P1Space) -> CsrMatrix {
    let mut b = TripletBuilder::new(morley.n_dofs(), interior.n_dofs());
    for dof in 0..morley.n_dofs() {
        match morley.site(dof) {
            DofSite::Vertex(v) => {
                if let Some(p) = interior.dof(v) {
                    b.push(dof, p, 1.0);
                }
            }
            DofSite::Edge(e) => {
                let edge = &mesh.edges()[e];
                let tris: Vec<usize> = std::iter::once(edge.left).chain(edge.right).collect();
                let w = 1.0 / tris.len() as f64;
                for t in tris {
                    let g = mesh.p1_gradients(t);
                    for (k, &v) in mesh.triangles()[t].iter().enumerate() {
                        if let Some(p) = interior.dof(v) {
                            b.push(dof, p, w * (g[k][0] * edge.normal[0] + g[k][1] * edge.normal[1]));
                        }
                    }
                }
            }
        }
    }
    b.build()
}
