//! Spectra of preconditioned operators.
//!
//! Every operator studied here has the form `P∘M` with `M` symmetric positive
//! definite and `P` symmetric, so it is self-adjoint in the `M` inner product
//! and has a real spectrum. Dense mode symmetrizes through a Cholesky factor
//! of `M`; Lanczos mode runs in the `M` inner product directly.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::vector::{dot, random_vector};
use crate::operators::{materialize, LinearMap};

/// Largest dimension accepted by [`dense_spectrum`].
pub const DENSE_LIMIT: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumMode {
    Dense,
    Lanczos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    pub mode: SpectrumMode,
    pub dim: usize,
    /// Ascending. All eigenvalues in dense mode, Ritz values in Lanczos mode.
    pub eigenvalues: Vec<f64>,
    /// Per-entry convergence flag (all true in dense mode).
    pub converged: Vec<bool>,
    pub iterations: usize,
}

impl SpectrumReport {
    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    pub fn kappa(&self) -> f64 {
        self.lambda_max() / self.lambda_min()
    }

    /// The `k` largest values, descending.
    pub fn top(&self, k: usize) -> Vec<f64> {
        self.eigenvalues.iter().rev().take(k).copied().collect()
    }

    /// Number of leading (largest) values that are flagged converged.
    pub fn converged_top(&self) -> usize {
        self.converged.iter().rev().take_while(|&&c| c).count()
    }

    /// `λ_{n-m} / λ_1`.
    pub fn effective_condition(&self, m: usize) -> Result<f64> {
        let have = self.converged_top().min(self.eigenvalues.len());
        if m + 1 > have || !self.converged[0] {
            return Err(Error::InsufficientEigenvalues { need: m + 1, have });
        }
        Ok(self.eigenvalues[self.eigenvalues.len() - 1 - m] / self.lambda_min())
    }
}

pub fn effective_condition(report: &SpectrumReport, m: usize) -> Result<f64> {
    report.effective_condition(m)
}

/// All eigenvalues of `op`, which must be self-adjoint in the inner product
/// given by the SPD matrix of `inner`.
pub fn dense_spectrum(op: &dyn LinearMap, inner: &dyn LinearMap) -> Result<SpectrumReport> {
    let n = op.dim_in();
    if n > DENSE_LIMIT {
        return Err(Error::BudgetExceeded { size: n, budget: DENSE_LIMIT });
    }
    let k = materialize(op);
    dense_spectrum_of_matrix(&k, &materialize(inner))
}

/// As [`dense_spectrum`] for an already materialized operator matrix `k`.
pub fn dense_spectrum_of_matrix(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<SpectrumReport> {
    let chol = m.clone().cholesky().ok_or(Error::NotPositiveDefinite { pivot: 0, value: f64::NAN })?;
    let l = chol.l();
    // X = Lᵀ K L^{-T}; K L^{-T} = (L^{-1} Kᵀ)ᵀ.
    let z = l.solve_lower_triangular(&k.transpose()).expect("cholesky factor is nonsingular");
    let mut x = l.transpose() * z.transpose();
    symmetrize(&mut x);
    Ok(symmetric_report(x))
}

/// All eigenvalues of `P∘M` from the dense symmetric `P` and SPD `M`,
/// computed as the spectrum of `Lᵀ P L` with `M = L Lᵀ`.
pub fn dense_product_spectrum(p: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<SpectrumReport> {
    let chol = m.clone().cholesky().ok_or(Error::NotPositiveDefinite { pivot: 0, value: f64::NAN })?;
    let l = chol.l();
    let mut x = l.transpose() * p * &l;
    symmetrize(&mut x);
    Ok(symmetric_report(x))
}

fn symmetric_report(x: DMatrix<f64>) -> SpectrumReport {
    let n = x.nrows();
    let mut eig: Vec<f64> = SymmetricEigen::new(x).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    SpectrumReport { mode: SpectrumMode::Dense, dim: n, eigenvalues: eig, converged: vec![true; n], iterations: n }
}

fn symmetrize(x: &mut DMatrix<f64>) {
    let n = x.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (x[(i, j)] + x[(j, i)]);
            x[(i, j)] = v;
            x[(j, i)] = v;
        }
    }
}

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    pub max_iter: usize,
    /// Number of largest Ritz values that must converge before stopping early.
    pub want_top: usize,
    /// Relative Ritz residual below which a value counts as converged. The
    /// residual also bounds the distance to the nearest true eigenvalue.
    pub tol: f64,
    pub seed: u64,
}

impl LanczosOptions {
    pub fn new(dim: usize, want_top: usize) -> Self {
        Self { max_iter: dim.min(300), want_top, tol: 1e-5, seed: 7 }
    }
}

/// Extremal eigenvalues of `op` by Lanczos in the `inner` inner product with
/// full reorthogonalization.
pub fn lanczos_extremal(op: &dyn LinearMap, inner: &dyn LinearMap, opts: &LanczosOptions) -> Result<SpectrumReport> {
    let n = op.dim_in();
    let max_iter = opts.max_iter.min(n).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v = random_vector(&mut rng, n);
    let mut mv = inner.apply(&v);
    let nrm = dot(&v, &mv).sqrt();
    v.iter_mut().for_each(|x| *x /= nrm);
    mv.iter_mut().for_each(|x| *x /= nrm);

    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut mbasis: Vec<Vec<f64>> = vec![mv];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut last = None;
    for j in 0..max_iter {
        let mut w = op.apply(&basis[j]);
        let a = dot(&w, &mbasis[j]);
        alpha.push(a);
        // Two passes of Gram–Schmidt against the whole basis.
        for _ in 0..2 {
            for (q, mq) in basis.iter().zip(&mbasis) {
                let c = dot(&w, mq);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let mw = inner.apply(&w);
        let b = dot(&w, &mw).max(0.0).sqrt();
        let scale = alpha.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let breakdown = b <= 1e-12 * scale.max(f64::MIN_POSITIVE);
        let done = j + 1 == max_iter || breakdown;
        if done || (j + 1) % 10 == 0 {
            let ritz = ritz_values(&alpha, &beta, if breakdown { 0.0 } else { b }, opts.tol);
            let enough = ritz.1[0] && ritz.1.iter().rev().take(opts.want_top).all(|&c| c);
            if done || enough && ritz.0.len() > opts.want_top {
                last = Some((ritz, j + 1));
                break;
            }
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
        mbasis.push(mw.iter().map(|x| x / b).collect());
    }
    let ((eigenvalues, converged), iterations) = last.expect("lanczos loop always records a result");
    Ok(SpectrumReport { mode: SpectrumMode::Lanczos, dim: n, eigenvalues, converged, iterations })
}

/// Ritz values of the tridiagonal matrix and convergence flags from the
/// residual bound `|β_k s_{k,i}|`.
fn ritz_values(alpha: &[f64], beta: &[f64], b_next: f64, tol: f64) -> (Vec<f64>, Vec<bool>) {
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut pairs: Vec<(f64, f64)> =
        (0..k).map(|i| (eig.eigenvalues[i], (b_next * eig.eigenvectors[(k - 1, i)]).abs())).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let scale = pairs.iter().fold(0.0f64, |m, p| m.max(p.0.abs()));
    let values = pairs.iter().map(|p| p.0).collect();
    let flags = pairs.iter().map(|p| p.1 <= tol * scale).collect();
    (values, flags)
}

/// Largest relative defect of `⟨Op x, y⟩_M = ⟨x, Op y⟩_M` over random pairs.
pub fn self_adjointness_defect(op: &dyn LinearMap, inner: &dyn LinearMap, pairs: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = op.dim_in();
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let x = random_vector(&mut rng, n);
        let y = random_vector(&mut rng, n);
        let ox = op.apply(&x);
        let oy = op.apply(&y);
        let lhs = dot(&ox, &inner.apply(&y));
        let rhs = dot(&x, &inner.apply(&oy));
        let scale = (dot(&ox, &inner.apply(&ox)) * dot(&y, &inner.apply(&y))).sqrt();
        worst = worst.max((lhs - rhs).abs() / scale.max(f64::MIN_POSITIVE));
    }
    worst
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationBound {
    /// `m_b + |ln tol| sqrt(κ^eff_{m_b})`.
    pub estimate: f64,
    /// Observed iterations divided by the estimate.
    pub constant: f64,
    /// `constant ≤ 3`.
    pub plausible: bool,
}

/// Compares an observed PCG iteration count with the effective-condition
/// estimate `m_b + |ln tol| sqrt(κ^eff_{m_b})`.
pub fn iteration_bound_check(report: &SpectrumReport, observed: usize, tol: f64, m_b: usize) -> Result<IterationBound> {
    let kappa = report.effective_condition(m_b)?;
    let estimate = m_b as f64 + tol.ln().abs() * kappa.sqrt();
    let constant = observed as f64 / estimate;
    Ok(IterationBound { estimate, constant, plausible: constant <= 3.0 })
}
