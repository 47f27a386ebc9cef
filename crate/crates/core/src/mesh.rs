//! Triangulations of the built-in polygonal domains.
//!
//! A [`Mesh`] owns vertices, counterclockwise triangles and the derived edge
//! table. Every edge carries a fixed global unit normal: the unit vector from
//! its lower-indexed to its higher-indexed endpoint, rotated by +90°. The
//! triangle that sees the edge traversed in that direction is the *left*
//! triangle, so its outward normal is `-n_e`.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    UnitSquare,
    FourSquare,
    Hexagon,
    LShape,
    Trident,
}

impl Domain {
    pub const ALL: [Domain; 5] =
        [Domain::UnitSquare, Domain::FourSquare, Domain::Hexagon, Domain::LShape, Domain::Trident];

    pub fn name(self) -> &'static str {
        match self {
            Domain::UnitSquare => "unit-square",
            Domain::FourSquare => "four-square",
            Domain::Hexagon => "hexagon",
            Domain::LShape => "l-shape",
            Domain::Trident => "trident",
        }
    }

    /// Number of reentrant corners.
    pub fn reentrant_corners(self) -> usize {
        match self {
            Domain::LShape => 1,
            Domain::Trident => 2,
            _ => 0,
        }
    }

    pub fn is_convex(self) -> bool {
        self.reentrant_corners() == 0
    }

    /// The hand-built coarse mesh.
    pub fn coarse_mesh(self) -> Mesh {
        let (vertices, triangles) = match self {
            Domain::UnitSquare => squares(&[(0.0, 0.0)], 1.0),
            Domain::FourSquare => {
                squares(&[(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5)], 0.5)
            }
            Domain::LShape => squares(&[(-1.0, -1.0), (-1.0, 0.0), (0.0, 0.0)], 1.0),
            Domain::Trident => squares(&[(0.0, 1.0), (1.0, 1.0), (2.0, 1.0), (1.0, 0.0)], 1.0),
            Domain::Hexagon => {
                let mut v = vec![[0.0, 0.0]];
                for k in 0..6 {
                    let t = std::f64::consts::PI / 3.0 * k as f64;
                    v.push([t.cos(), t.sin()]);
                }
                let t = (0..6).map(|k| [0, k + 1, (k + 1) % 6 + 1]).collect();
                (v, t)
            }
        };
        Mesh::new(vertices, triangles, None).expect("built-in coarse mesh is valid")
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Domain::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::UnknownDomain(s.to_string()))
    }
}

/// Axis-aligned squares of side `side` with lower-left corners `origins`,
/// each split along its rising diagonal. Shared vertices are merged.
fn squares(origins: &[(f64, f64)], side: f64) -> (Vec<Point>, Vec<[usize; 3]>) {
    let mut vertices: Vec<Point> = Vec::new();
    let index = |p: Point, vs: &mut Vec<Point>| -> usize {
        match vs.iter().position(|q| (q[0] - p[0]).abs() < 1e-12 && (q[1] - p[1]).abs() < 1e-12) {
            Some(i) => i,
            None => {
                vs.push(p);
                vs.len() - 1
            }
        }
    };
    let mut triangles = Vec::new();
    for &(x, y) in origins {
        let a = index([x, y], &mut vertices);
        let b = index([x + side, y], &mut vertices);
        let c = index([x + side, y + side], &mut vertices);
        let d = index([x, y + side], &mut vertices);
        triangles.push([a, b, c]);
        triangles.push([a, c, d]);
    }
    (vertices, triangles)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    /// Endpoints, lower index first.
    pub vertices: [usize; 2],
    pub normal: Point,
    pub left: usize,
    pub right: Option<usize>,
    pub length: f64,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }

    pub fn midpoint(&self, mesh: &Mesh) -> Point {
        let a = mesh.vertices[self.vertices[0]];
        let b = mesh.vertices[self.vertices[1]];
        [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]
    }
}

/// Geometry needed to evaluate normal-derivative jumps across one edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JumpFrame {
    pub normal: Point,
    pub left: usize,
    pub right: Option<usize>,
    /// `n_e · n_e^L` where `n_e^L` is the outward normal of the left triangle.
    pub left_sign: f64,
    /// `n_e · n_e^R`; absent on boundary edges.
    pub right_sign: Option<f64>,
}

impl JumpFrame {
    /// Jump of the normal derivative of a function with constant gradient on
    /// each adjacent triangle; on boundary edges the one-sided derivative.
    pub fn jump(&self, grad_left: Point, grad_right: Option<Point>) -> f64 {
        let n = self.normal;
        let dl = grad_left[0] * n[0] + grad_left[1] * n[1];
        match (self.right_sign, grad_right) {
            (Some(sr), Some(gr)) => dl * self.left_sign + (gr[0] * n[0] + gr[1] * n[1]) * sr,
            _ => dl,
        }
    }
}

/// A maximal straight run of the boundary between two consecutive corners.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    /// Boundary vertices from the start corner to the end corner, inclusive.
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl Segment {
    /// Vertices strictly between the two corners.
    pub fn interior_vertices(&self) -> &[usize] {
        &self.vertices[1..self.vertices.len() - 1]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryTopology {
    /// Boundary vertices in counterclockwise order, starting at the first corner.
    pub loop_vertices: Vec<usize>,
    /// `loop_edges[i]` joins `loop_vertices[i]` and `loop_vertices[i + 1]`.
    pub loop_edges: Vec<usize>,
    /// Corner vertices in loop order.
    pub corners: Vec<usize>,
    pub reentrant: Vec<bool>,
    pub segments: Vec<Segment>,
}

impl BoundaryTopology {
    pub fn m0(&self) -> usize {
        self.reentrant.iter().filter(|&&r| r).count()
    }

    pub fn perimeter(&self, mesh: &Mesh) -> f64 {
        self.loop_edges.iter().map(|&e| mesh.edges[e].length).sum()
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    /// Local edge `i` of a triangle is opposite its local vertex `i`.
    tri_edges: Vec<[usize; 3]>,
    on_boundary: Vec<bool>,
    boundary: BoundaryTopology,
}

impl Mesh {
    /// Builds the edge table and boundary topology. Clockwise triangles are
    /// reoriented; `corners`, when absent, are detected as the boundary
    /// vertices where the boundary turns.
    pub fn new(vertices: Vec<Point>, mut triangles: Vec<[usize; 3]>, corners: Option<Vec<usize>>) -> Result<Self> {
        let nv = vertices.len();
        for (t, tri) in triangles.iter_mut().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::MeshFormat(format!("triangle {t} references a missing vertex")));
            }
            let area = signed_area(&vertices, *tri);
            if area.abs() <= 1e-14 {
                return Err(Error::DegenerateTriangle(t));
            }
            if area < 0.0 {
                tri.swap(1, 2);
            }
        }

        let mut lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(triangles.len() * 2);
        let mut edges: Vec<Edge> = Vec::with_capacity(triangles.len() * 3 / 2 + 4);
        let mut tri_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut te = [0usize; 3];
            for i in 0..3 {
                let a = tri[(i + 1) % 3];
                let b = tri[(i + 2) % 3];
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if edge.right.is_some() {
                            return Err(Error::MeshFormat(format!("edge {:?} shared by more than two triangles", key)));
                        }
                        // a -> b in this triangle; left triangles traverse lo -> hi.
                        if a < b {
                            edge.right = Some(edge.left);
                            edge.left = t;
                        } else {
                            edge.right = Some(t);
                        }
                        te[i] = e;
                    }
                    None => {
                        let (p, q) = (vertices[key.0], vertices[key.1]);
                        let d = [q[0] - p[0], q[1] - p[1]];
                        let length = (d[0] * d[0] + d[1] * d[1]).sqrt();
                        lookup.insert(key, edges.len());
                        te[i] = edges.len();
                        edges.push(Edge {
                            vertices: [key.0, key.1],
                            normal: [-d[1] / length, d[0] / length],
                            left: t,
                            right: None,
                            length,
                        });
                    }
                }
            }
            tri_edges.push(te);
        }
        let mut on_boundary = vec![false; nv];
        for e in edges.iter().filter(|e| e.is_boundary()) {
            on_boundary[e.vertices[0]] = true;
            on_boundary[e.vertices[1]] = true;
        }
        let mut mesh = Mesh {
            vertices,
            triangles,
            edges,
            tri_edges,
            on_boundary,
            boundary: BoundaryTopology {
                loop_vertices: vec![],
                loop_edges: vec![],
                corners: vec![],
                reentrant: vec![],
                segments: vec![],
            },
        };
        mesh.boundary = mesh.boundary_topology(corners)?;
        Ok(mesh)
    }

    fn boundary_topology(&self, corners: Option<Vec<usize>>) -> Result<BoundaryTopology> {
        // Follow boundary edges in the direction that keeps the interior on the left.
        let mut next: HashMap<usize, (usize, usize)> = HashMap::new();
        for (e, edge) in self.edges.iter().enumerate().filter(|(_, e)| e.is_boundary()) {
            let t = self.triangles[edge.left];
            let k = self.tri_edges[edge.left].iter().position(|&x| x == e).unwrap();
            let (a, b) = (t[(k + 1) % 3], t[(k + 2) % 3]);
            if next.insert(a, (b, e)).is_some() {
                return Err(Error::MeshFormat(format!("boundary is not a simple loop at vertex {a}")));
            }
        }
        if next.is_empty() {
            return Err(Error::MeshFormat("mesh has no boundary".into()));
        }
        let start = *next.keys().min().unwrap();
        let mut ring = vec![start];
        let mut ring_edges = Vec::new();
        let mut v = start;
        loop {
            let (w, e) = next[&v];
            ring_edges.push(e);
            if w == start {
                break;
            }
            ring.push(w);
            v = w;
            if ring.len() > next.len() {
                return Err(Error::MeshFormat("boundary loop does not close".into()));
            }
        }
        if ring.len() != next.len() {
            return Err(Error::MeshFormat("boundary has more than one component".into()));
        }

        let n = ring.len();
        let turn = |i: usize| -> f64 {
            let p = self.vertices[ring[(i + n - 1) % n]];
            let c = self.vertices[ring[i]];
            let q = self.vertices[ring[(i + 1) % n]];
            let d1 = [c[0] - p[0], c[1] - p[1]];
            let d2 = [q[0] - c[0], q[1] - c[1]];
            let cross = d1[0] * d2[1] - d1[1] * d2[0];
            cross / ((d1[0].hypot(d1[1])) * (d2[0].hypot(d2[1])))
        };
        let corner_pos: Vec<usize> = match corners {
            Some(cs) => {
                let mut pos = Vec::with_capacity(cs.len());
                for c in cs {
                    match ring.iter().position(|&v| v == c) {
                        Some(p) => pos.push(p),
                        None => return Err(Error::MeshFormat(format!("corner {c} is not a boundary vertex"))),
                    }
                }
                pos.sort_unstable();
                pos.dedup();
                pos
            }
            None => (0..n).filter(|&i| turn(i).abs() > 1e-9).collect(),
        };
        if corner_pos.len() < 3 {
            return Err(Error::MeshFormat("boundary needs at least three corners".into()));
        }
        // Restart the loop at the first corner.
        let shift = corner_pos[0];
        let loop_vertices: Vec<usize> = (0..n).map(|i| ring[(i + shift) % n]).collect();
        let loop_edges: Vec<usize> = (0..n).map(|i| ring_edges[(i + shift) % n]).collect();
        let corner_pos: Vec<usize> = corner_pos.iter().map(|p| p - shift).collect();
        let corners: Vec<usize> = corner_pos.iter().map(|&p| loop_vertices[p]).collect();
        let reentrant = corner_pos.iter().map(|&p| turn((p + shift) % n) < -1e-9).collect();
        let segments = (0..corner_pos.len())
            .map(|s| {
                let a = corner_pos[s];
                let b = if s + 1 < corner_pos.len() { corner_pos[s + 1] } else { n };
                Segment {
                    vertices: (a..=b).map(|i| loop_vertices[i % n]).collect(),
                    edges: (a..b).map(|i| loop_edges[i]).collect(),
                }
            })
            .collect();
        Ok(BoundaryTopology { loop_vertices, loop_edges, corners, reentrant, segments })
    }

    /// The named coarse mesh refined `level` times.
    pub fn build_domain(domain: Domain, level: usize) -> Mesh {
        (0..level).fold(domain.coarse_mesh(), |m, _| m.refine())
    }

    /// Uniform quadrisection through edge midpoints.
    pub fn refine(&self) -> Mesh {
        let nv = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend(self.edges.iter().map(|e| e.midpoint(self)));
        let mut triangles = Vec::with_capacity(self.triangles.len() * 4);
        for (t, &[a, b, c]) in self.triangles.iter().enumerate() {
            let [ea, eb, ec] = self.tri_edges[t];
            let (ma, mb, mc) = (nv + ea, nv + eb, nv + ec);
            triangles.push([a, mc, mb]);
            triangles.push([mc, b, ma]);
            triangles.push([mb, ma, c]);
            triangles.push([ma, mb, mc]);
        }
        Mesh::new(vertices, triangles, Some(self.boundary.corners.clone())).expect("refinement of a valid mesh")
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn tri_edges(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn boundary(&self) -> &BoundaryTopology {
        &self.boundary
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.on_boundary[v]
    }

    pub fn n_boundary_vertices(&self) -> usize {
        self.boundary.loop_vertices.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        signed_area(&self.vertices, self.triangles[t])
    }

    /// Diameter (longest edge) of triangle `t`.
    pub fn diameter(&self, t: usize) -> f64 {
        self.tri_edges[t].iter().map(|&e| self.edges[e].length).fold(0.0, f64::max)
    }

    /// Global mesh size `h = max_T h_T`.
    pub fn h(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.diameter(t)).fold(0.0, f64::max)
    }

    pub fn h_min(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.diameter(t)).fold(f64::INFINITY, f64::min)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.area(t)).sum()
    }

    /// Gradients of the three barycentric coordinates on triangle `t`.
    pub fn p1_gradients(&self, t: usize) -> [Point; 3] {
        let [p0, p1, p2] = self.triangle_points(t);
        let two_area = 2.0 * self.area(t);
        let g = |a: Point, b: Point| [(a[1] - b[1]) / two_area, (b[0] - a[0]) / two_area];
        [g(p1, p2), g(p2, p0), g(p0, p1)]
    }

    /// Gradient on triangle `t` of the P1 function with nodal values `values`
    /// (indexed by vertex).
    pub fn p1_gradient_of(&self, t: usize, values: &[f64]) -> Point {
        let g = self.p1_gradients(t);
        let tri = self.triangles[t];
        let mut out = [0.0; 2];
        for i in 0..3 {
            out[0] += values[tri[i]] * g[i][0];
            out[1] += values[tri[i]] * g[i][1];
        }
        out
    }

    pub fn edge_jump_frame(&self, e: usize) -> JumpFrame {
        let edge = &self.edges[e];
        JumpFrame {
            normal: edge.normal,
            left: edge.left,
            right: edge.right,
            left_sign: self.outward_sign(e, edge.left),
            right_sign: edge.right.map(|r| self.outward_sign(e, r)),
        }
    }

    /// `n_e · n_T` for the outward normal `n_T` of triangle `t` on edge `e`.
    pub fn outward_sign(&self, e: usize, t: usize) -> f64 {
        let k = self.tri_edges[t].iter().position(|&x| x == e).expect("edge belongs to triangle");
        let tri = self.triangles[t];
        if tri[(k + 1) % 3] < tri[(k + 2) % 3] {
            -1.0
        } else {
            1.0
        }
    }

    /// `#V - #E + #T`.
    pub fn euler_characteristic(&self) -> isize {
        self.n_vertices() as isize - self.n_edges() as isize + self.n_triangles() as isize
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write(std::io::BufWriter::new(file))
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "tri-mesh v1")?;
        writeln!(out, "V {}", self.vertices.len())?;
        for v in &self.vertices {
            writeln!(out, "{} {}", v[0], v[1])?;
        }
        writeln!(out, "T {}", self.triangles.len())?;
        for t in &self.triangles {
            writeln!(out, "{} {} {}", t[0], t[1], t[2])?;
        }
        writeln!(out, "C {}", self.boundary.corners.len())?;
        for c in &self.boundary.corners {
            writeln!(out, "{c}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Mesh> {
        let file = std::fs::File::open(path)?;
        Self::read(std::io::BufReader::new(file))
    }

    pub fn read<R: BufRead>(input: R) -> Result<Mesh> {
        let mut text = String::new();
        for line in input.lines() {
            text.push_str(&line?);
            text.push('\n');
        }
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        if lines.next() != Some("tri-mesh v1") {
            return Err(Error::MeshFormat("missing `tri-mesh v1` header".into()));
        }
        let mut tokens = lines.flat_map(str::split_whitespace);
        let section = |tag: &str, tokens: &mut dyn Iterator<Item = &str>| -> Result<usize> {
            match tokens.next() {
                Some(t) if t == tag => {}
                other => return Err(Error::MeshFormat(format!("expected section `{tag}`, found {other:?}"))),
            }
            parse_token(tokens.next(), "count")
        };
        let nv = section("V", &mut tokens)?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let x: f64 = parse_token(tokens.next(), "x coordinate")?;
            let y: f64 = parse_token(tokens.next(), "y coordinate")?;
            vertices.push([x, y]);
        }
        let nt = section("T", &mut tokens)?;
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let mut t = [0usize; 3];
            for k in &mut t {
                *k = parse_token(tokens.next(), "vertex index")?;
            }
            triangles.push(t);
        }
        let corners = match tokens.next() {
            None => None,
            Some("C") => {
                let k: usize = parse_token(tokens.next(), "corner count")?;
                let mut cs = Vec::with_capacity(k);
                for _ in 0..k {
                    cs.push(parse_token(tokens.next(), "corner index")?);
                }
                Some(cs)
            }
            Some(other) => return Err(Error::MeshFormat(format!("unexpected token `{other}`"))),
        };
        if let Some(extra) = tokens.next() {
            return Err(Error::MeshFormat(format!("trailing data `{extra}`")));
        }
        Mesh::new(vertices, triangles, corners)
    }
}

fn parse_token<T: FromStr>(tok: Option<&str>, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::MeshFormat(format!("unexpected end of file reading {what}")))?;
    tok.parse().map_err(|_| Error::MeshFormat(format!("cannot parse {what} from `{tok}`")))
}

fn signed_area(vertices: &[Point], [a, b, c]: [usize; 3]) -> f64 {
    let (p, q, r) = (vertices[a], vertices[b], vertices[c]);
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
}

/// Triangles around each vertex, ordered so that consecutive entries share an
/// edge. Patches of interior vertices are closed cycles.
#[derive(Clone, Debug)]
pub struct PatchIndex {
    pub vertex_patches: Vec<Vec<usize>>,
    pub edge_patches: Vec<Vec<usize>>,
}

impl PatchIndex {
    pub fn build(mesh: &Mesh) -> Self {
        let mut around: Vec<Vec<usize>> = vec![Vec::new(); mesh.n_vertices()];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            for &v in tri {
                around[v].push(t);
            }
        }
        let vertex_patches = around
            .into_iter()
            .enumerate()
            .map(|(v, tris)| order_patch(mesh, v, tris))
            .collect();
        let edge_patches = mesh
            .edges()
            .iter()
            .map(|e| std::iter::once(e.left).chain(e.right).collect())
            .collect();
        Self { vertex_patches, edge_patches }
    }
}

fn order_patch(mesh: &Mesh, v: usize, tris: Vec<usize>) -> Vec<usize> {
    // Rotate counterclockwise around v: the triangle (v, a, b) is followed by
    // the one containing the edge (v, b) as (v, b, c).
    let succ = |t: usize| -> usize {
        let tri = mesh.triangles()[t];
        let k = tri.iter().position(|&x| x == v).unwrap();
        tri[(k + 2) % 3]
    };
    let pred = |t: usize| -> usize {
        let tri = mesh.triangles()[t];
        let k = tri.iter().position(|&x| x == v).unwrap();
        tri[(k + 1) % 3]
    };
    // On the boundary start from the triangle with no predecessor.
    let start = tris
        .iter()
        .copied()
        .find(|&t| !tris.iter().any(|&s| s != t && succ(s) == pred(t)))
        .unwrap_or(tris[0]);
    let mut ordered = vec![start];
    while ordered.len() < tris.len() {
        let last = *ordered.last().unwrap();
        match tris.iter().copied().find(|&s| pred(s) == succ(last)) {
            Some(s) if s != start => ordered.push(s),
            _ => break,
        }
    }
    ordered
}
