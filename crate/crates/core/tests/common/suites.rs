//! Convention-free property checks. Each returns a one-line summary or the
//! first violation.

use super::*;
use fasp_biharmonic::assembly::morley_l2_squared_on;
use fasp_biharmonic::linalg::vector::{norm, sub};
use fasp_biharmonic::spaces::DofSite;
use rand::Rng;

pub type Check = Result<String, String>;

pub const LEVELS: [usize; 3] = [2, 3, 4];

/// Per-level maxima of `f` over random samples, for one domain and kind.
pub fn level_maxima(domain: Domain, kind: u8, seed: u64, morley: bool, f: impl Fn(&MorleyFixture, &[f64]) -> f64) -> Vec<f64> {
    LEVELS
        .iter()
        .map(|&l| {
            let fx = MorleyFixture::new(domain, l, kind);
            let n = if morley { fx.space.n_dofs() } else { fx.n_interior() };
            max_over_samples(n, 40, seed + l as u64, |v| f(&fx, v))
        })
        .collect()
}

/// Constants at finer levels stay within 1.5 times the coarsest one.
pub fn bounded_by_coarsest(c: &[f64]) -> bool {
    c.iter().all(|&x| x <= 1.5 * c[0])
}

fn bounded(label: String, c: Vec<f64>) -> Result<f64, String> {
    if bounded_by_coarsest(&c) && c.iter().all(|x| x.is_finite() && *x > 0.0) {
        Ok(c.iter().cloned().fold(0.0, f64::max))
    } else {
        Err(format!("{label}: constants grow {c:?}"))
    }
}

/// Two-sided equivalence of the discrete Laplacian norm and the gradient
/// jump seminorm. The lower bound for the second kind holds on convex
/// domains only.
pub fn jump_equivalence() -> Check {
    let mut worst: f64 = 0.0;
    for d in ALL_DOMAINS {
        for kind in [1, 2] {
            worst = worst.max(bounded(format!("{d} k{kind} upper"), level_maxima(d, kind, 10, false, |f, p| f.jump_ratios(p).0))?);
            if kind == 1 || d.is_convex() {
                worst = worst.max(bounded(format!("{d} k{kind} lower"), level_maxima(d, kind, 20, false, |f, p| f.jump_ratios(p).1))?);
            }
        }
    }
    Ok(format!("largest constant {worst:.3}"))
}

/// Two-sided bounds of the stable decomposition quotient.
pub fn stable_decomposition() -> Check {
    let mut range = (f64::MAX, 0.0f64);
    for d in ALL_DOMAINS {
        for kind in [1, 2] {
            if kind == 2 && !d.is_convex() {
                continue;
            }
            let hi = bounded(format!("{d} k{kind} upper"), level_maxima(d, kind, 30, true, |f, w| f.decomposition_ratio(w)))?;
            let lo = bounded(format!("{d} k{kind} lower"), level_maxima(d, kind, 40, true, |f, w| 1.0 / f.decomposition_ratio(w)))?;
            range = (range.0.min(1.0 / lo), range.1.max(hi));
        }
    }
    Ok(format!("quotient within [{:.3}, {:.3}]", range.0, range.1))
}

/// Scaled distance between `Π p` and `p` against the jump seminorm.
pub fn lift_error() -> Check {
    let mut worst: f64 = 0.0;
    for d in ALL_DOMAINS {
        for kind in [1, 2] {
            worst = worst.max(bounded(format!("{d} k{kind}"), level_maxima(d, kind, 50, false, |f, p| f.lift_error_ratio(p)))?);
        }
    }
    Ok(format!("largest constant {worst:.2e}"))
}

/// `‖Δ_1 v‖ / ‖Δ_2 v‖` grows at most like `h^{-1/2}` on convex domains, and
/// `‖Δ_2 v‖ ≤ ‖Δ_1 v‖` always.
pub fn laplacian_ratio_trend() -> Check {
    let mut worst_exp = f64::MIN;
    for d in ALL_DOMAINS.into_iter().filter(|d| d.is_convex()) {
        let mut h_inv = Vec::new();
        let mut worst = Vec::new();
        for l in [3, 4, 5] {
            let f = MorleyFixture::new(d, l, 1);
            let ratio = |p: &[f64]| (f.laplacians.norm_squared(1, p) / f.laplacians.norm_squared(2, p)).sqrt();
            let ones = vec![1.0; f.n_interior()];
            let random = max_over_samples(f.n_interior(), 20, 60, ratio);
            if ratio(&ones) < 1.0 - 1e-12 || random < 1.0 - 1e-12 {
                return Err(format!("{d} level {l}: second-kind norm exceeds first-kind norm"));
            }
            h_inv.push(1.0 / f.mesh.h());
            worst.push(random.max(ratio(&ones)));
        }
        let e = growth_exponent(&h_inv, &worst);
        if e > 0.6 {
            return Err(format!("{d}: exponent {e:.3}, ratios {worst:?}"));
        }
        worst_exp = worst_exp.max(e);
    }
    Ok(format!("largest growth exponent {worst_exp:.3}"))
}

/// The second-kind Laplacian is the interior L² projection of the first.
pub fn projection_identity() -> Check {
    let mut worst: f64 = 0.0;
    for d in ALL_DOMAINS {
        let f = MorleyFixture::new(d, 3, 1);
        let mut r = rng(70);
        for _ in 0..50 {
            let w = random_vector(&mut r, f.n_interior());
            let second = f.laplacians.neg_apply(2, &w);
            let projected = f.laplacians.project_interior(&f.laplacians.neg_apply(1, &w));
            worst = worst.max(norm(&sub(&second, &projected)) / norm(&second));
        }
    }
    if worst <= 1e-9 {
        Ok(format!("relative defect {worst:.1e}"))
    } else {
        Err(format!("relative defect {worst:.1e}"))
    }
}

/// Local scaling of the Morley functionals against the L² norm on one
/// triangle, compared across levels.
pub fn local_scaling() -> Check {
    let bounds = |level: usize| {
        let f = MorleyFixture::new(Domain::Hexagon, level, 2);
        let mut r = rng(80);
        let (mut lo, mut hi) = (f64::MAX, f64::MIN);
        for t in (0..f.mesh.n_triangles()).step_by(7) {
            let h = f.mesh.diameter(t);
            for _ in 0..20 {
                let vals: [f64; 6] = std::array::from_fn(|_| r.gen_range(-1.0..1.0));
                let scaled: f64 = (0..6).map(|i| h.powi(if i < 3 { 2 } else { 4 }) * vals[i].powi(2)).sum();
                let q = morley_l2_squared_on(&f.mesh, &f.bases[t], t, &vals) / scaled;
                lo = lo.min(q);
                hi = hi.max(q);
            }
        }
        (lo, hi)
    };
    let coarse = bounds(1);
    for l in [3, 5] {
        let (lo, hi) = bounds(l);
        if !(lo > 0.0 && lo >= 0.5 * coarse.0 && hi <= 2.0 * coarse.1) {
            return Err(format!("level {l}: [{lo:.3e}, {hi:.3e}] vs {coarse:?}"));
        }
    }
    Ok(format!("quotient within [{:.3e}, {:.3e}]", coarse.0, coarse.1))
}

/// Mean-square split of patchwise edge data, on mesh data and on random
/// reals, plus the chain-difference equivalence.
pub fn scalar_identities() -> Check {
    let mut worst: f64 = 0.0;
    for d in ALL_DOMAINS {
        let f = MorleyFixture::new(d, 2, 1);
        let mut r = rng(90);
        let w = random_vector(&mut r, f.space.n_dofs());
        let p = random_vector(&mut r, f.n_interior());
        let lifted = f.lift.mul_vec(&p);
        for dof in 0..f.space.n_dofs() {
            let DofSite::Edge(e) = f.space.site(dof) else { continue };
            let edge = &f.mesh.edges()[e];
            let sides: Vec<f64> = std::iter::once(edge.left)
                .chain(edge.right)
                .map(|t| {
                    let k = f.mesh.tri_edges(t).iter().position(|&x| x == e).unwrap();
                    f.p1_local_values(t, &p)[3 + k]
                })
                .collect();
            let mean = sides.iter().sum::<f64>() / sides.len() as f64;
            if (mean - lifted[dof]).abs() > 1e-12 * (1.0 + mean.abs()) {
                return Err(format!("{d} dof {dof}: edge dof is not the patch mean"));
            }
            let (lhs, rhs) = mean_square_split(w[dof], &sides);
            worst = worst.max((lhs - rhs).abs() / lhs.max(1.0));
        }
    }
    let mut r = rng(91);
    for _ in 0..2000 {
        let m = r.gen_range(1..=8);
        let beta: Vec<f64> = (0..m).map(|_| r.gen_range(-10.0..10.0)).collect();
        let gamma = r.gen_range(-10.0..10.0);
        let (lhs, rhs) = mean_square_split(gamma, &beta);
        worst = worst.max((lhs - rhs).abs() / lhs.max(1.0));
        let (lhs, rhs) = chain_sides(gamma, &beta);
        let (up, down) = chain_constants(m);
        if lhs > up * rhs * (1.0 + 1e-12) || rhs > down * lhs * (1.0 + 1e-12) {
            return Err(format!("chain equivalence violated for m = {m}: {lhs} vs {rhs}"));
        }
    }
    if worst <= 1e-12 {
        Ok(format!("mean-square defect {worst:.1e}"))
    } else {
        Err(format!("mean-square defect {worst:.1e}"))
    }
}
