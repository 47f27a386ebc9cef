//! Oracles shared by the property tests and the acceptance suite.
#![allow(dead_code)]

pub mod suites;

use std::sync::Arc;

use fasp_biharmonic::assembly::{assemble_morley, morley_l2_squared_on, P1Matrices};
use fasp_biharmonic::linalg::vector::{dot, random_vector};
use fasp_biharmonic::linalg::CsrMatrix;
use fasp_biharmonic::mesh::{Domain, Mesh};
use fasp_biharmonic::operators::{p1_to_morley, vertex_injection, DiscreteLaplacians};
use fasp_biharmonic::spaces::{LocalMorleyBasis, MorleyBc, MorleySpace};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const ALL_DOMAINS: [Domain; 5] =
    [Domain::UnitSquare, Domain::FourSquare, Domain::Hexagon, Domain::LShape, Domain::Trident];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn bc_of(kind: u8) -> MorleyBc {
    if kind == 1 {
        MorleyBc::First
    } else {
        MorleyBc::Second
    }
}

/// `max / min` of positive values.
pub fn drift(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    max / min
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn growth_exponent(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Morley space of one kind together with the P1 objects the stable
/// decomposition is stated in.
pub struct MorleyFixture {
    pub mesh: Mesh,
    pub kind: u8,
    pub space: MorleySpace,
    pub p1: Arc<P1Matrices>,
    pub laplacians: DiscreteLaplacians,
    pub stiffness: CsrMatrix,
    /// Morley to interior P1.
    pub inject: CsrMatrix,
    /// Interior P1 to Morley.
    pub lift: CsrMatrix,
    pub bases: Vec<LocalMorleyBasis>,
}

impl MorleyFixture {
    pub fn new(domain: Domain, level: usize, kind: u8) -> Self {
        let mesh = Mesh::build_domain(domain, level);
        let space = MorleySpace::build(&mesh, bc_of(kind));
        let p1 = Arc::new(P1Matrices::assemble(&mesh));
        let laplacians = DiscreteLaplacians::new(p1.clone()).unwrap();
        let stiffness = assemble_morley(&mesh, &space).unwrap();
        let inject = vertex_injection(&space, &p1.interior);
        let lift = p1_to_morley(&mesh, &space, &p1.interior);
        let bases = (0..mesh.n_triangles()).map(|t| LocalMorleyBasis::new(&mesh, t).unwrap()).collect();
        Self { mesh, kind, space, p1, laplacians, stiffness, inject, lift, bases }
    }

    pub fn n_interior(&self) -> usize {
        self.p1.interior.n_dofs()
    }

    /// Local Morley dof values of the linear function `p|_T`.
    pub fn p1_local_values(&self, t: usize, p: &[f64]) -> [f64; 6] {
        let values = self.p1.interior.to_vertex_values(p, self.mesh.n_vertices());
        let tri = self.mesh.triangles()[t];
        let g = self.mesh.p1_gradient_of(t, &values);
        let n = self.bases[t].normals;
        [
            values[tri[0]],
            values[tri[1]],
            values[tri[2]],
            g[0] * n[0][0] + g[1] * n[0][1],
            g[0] * n[1][0] + g[1] * n[1][1],
            g[0] * n[2][0] + g[1] * n[2][1],
        ]
    }

    /// `Σ_T h_T^{-4} ‖w − p‖²_{0,T}` for Morley `w` and interior P1 `p`.
    pub fn scaled_gap(&self, w: &[f64], p: &[f64]) -> f64 {
        (0..self.mesh.n_triangles())
            .map(|t| {
                let wl = self.space.local_values(&self.mesh, t, w);
                let pl = self.p1_local_values(t, p);
                let diff: [f64; 6] = std::array::from_fn(|i| wl[i] - pl[i]);
                morley_l2_squared_on(&self.mesh, &self.bases[t], t, &diff) / self.mesh.diameter(t).powi(4)
            })
            .sum()
    }

    /// Stable decomposition quotient for Morley `w`.
    pub fn decomposition_ratio(&self, w: &[f64]) -> f64 {
        let p = self.inject.mul_vec(w);
        let smooth = self.lift.mul_vec(&p);
        let rough: Vec<f64> = w.iter().zip(&smooth).map(|(a, b)| a - b).collect();
        let top = self.scaled_gap(&rough, &vec![0.0; p.len()]) + self.laplacians.norm_squared(self.kind, &p);
        top / dot(w, &self.stiffness.mul_vec(w))
    }

    /// `Σ_T h_T^{-4}‖Π p − p‖²_{0,T}` over the jump seminorm.
    pub fn lift_error_ratio(&self, p: &[f64]) -> f64 {
        let lifted = self.lift.mul_vec(p);
        self.scaled_gap(&lifted, p) / fasp_biharmonic::assembly::jump_seminorm(&self.mesh, &self.p1.interior, p, self.kind)
    }

    /// `(‖Δ p‖² / jump, jump / ‖Δ p‖²)` for interior P1 `p`.
    pub fn jump_ratios(&self, p: &[f64]) -> (f64, f64) {
        let lap = self.laplacians.norm_squared(self.kind, p);
        let jump = fasp_biharmonic::assembly::jump_seminorm(&self.mesh, &self.p1.interior, p, self.kind);
        (lap / jump, jump / lap)
    }
}

/// Largest value of `f` over `samples` random vectors of length `n`.
pub fn max_over_samples(n: usize, samples: usize, seed: u64, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let mut r = rng(seed);
    (0..samples).map(|_| f(&random_vector(&mut r, n))).fold(f64::MIN, f64::max)
}

/// `Σ (c − b_i)²` and its mean-square split `m (c − b̄)² + Σ (b̄ − b_i)²`.
pub fn mean_square_split(c: f64, b: &[f64]) -> (f64, f64) {
    let m = b.len() as f64;
    let mean = b.iter().sum::<f64>() / m;
    let lhs = b.iter().map(|bi| (c - bi).powi(2)).sum();
    let rhs = m * (c - mean).powi(2) + b.iter().map(|bi| (mean - bi).powi(2)).sum::<f64>();
    (lhs, rhs)
}

/// Both sides of the chain-difference equivalence: `(1/m) Σ (γ − β_i)²` and
/// `(γ − β̄)² + (1/m) Σ_{i<m} (β_i − β_{i+1})²`.
pub fn chain_sides(gamma: f64, beta: &[f64]) -> (f64, f64) {
    let m = beta.len() as f64;
    let mean = beta.iter().sum::<f64>() / m;
    let lhs = beta.iter().map(|b| (gamma - b).powi(2)).sum::<f64>() / m;
    let chain: f64 = beta.windows(2).map(|w| (w[0] - w[1]).powi(2)).sum();
    (lhs, (gamma - mean).powi(2) + chain / m)
}

/// Constants of the chain-difference equivalence: `lhs ≤ c_m rhs` and
/// `rhs ≤ 4 lhs`. The first follows from Cauchy–Schwarz along the chain,
/// the second from `(a − b)² ≤ 2a² + 2b²`.
pub fn chain_constants(m: usize) -> (f64, f64) {
    ((m * (m - 1) / 2).max(1) as f64, 4.0)
}
