//! Sparse Cholesky factorization `P A Pᵀ = L Lᵀ`.
//!
//! Up-looking (row-by-row) numeric factorization driven by the elimination
//! tree, preceded by a nested-dissection ordering.

use super::ordering::nested_dissection;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

const NONE: usize = usize::MAX;

#[derive(Clone, Debug)]
pub struct SparseCholesky {
    n: usize,
    /// `perm[new] = old`
    perm: Vec<usize>,
    /// Column pointers of `L`; the diagonal is the first entry of each column.
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
}

impl SparseCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let perm = nested_dissection(a);
        Self::factor_with_ordering(a, perm)
    }

    pub fn factor_with_ordering(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || perm.len() != n {
            return Err(Error::Dimension(format!(
                "cholesky of {}x{} with ordering of length {}",
                n,
                a.ncols(),
                perm.len()
            )));
        }
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        // Upper triangle of C = P A Pᵀ stored by columns: column k holds rows i <= k.
        let mut cp = vec![0usize; n + 1];
        for old in 0..n {
            let k = inv[old];
            let (cols, _) = a.row(old);
            cp[k + 1] += cols.iter().filter(|&&j| inv[j] <= k).count();
        }
        for k in 0..n {
            cp[k + 1] += cp[k];
        }
        let mut ci = vec![0usize; cp[n]];
        let mut cx = vec![0.0; cp[n]];
        let mut fill = cp.clone();
        for old in 0..n {
            let k = inv[old];
            let (cols, vals) = a.row(old);
            for (&j, &v) in cols.iter().zip(vals) {
                let i = inv[j];
                if i <= k {
                    ci[fill[k]] = i;
                    cx[fill[k]] = v;
                    fill[k] += 1;
                }
            }
        }

        let parent = etree(n, &cp, &ci);

        // Column counts by walking every row pattern once.
        let mut counts = vec![1usize; n];
        let mut flag = vec![NONE; n];
        let mut stack = vec![0usize; n];
        for k in 0..n {
            let top = ereach(k, &cp, &ci, &parent, &mut flag, &mut stack);
            for &i in &stack[top..] {
                counts[i] += 1;
            }
        }
        let mut lp = vec![0usize; n + 1];
        for k in 0..n {
            lp[k + 1] = lp[k] + counts[k];
        }
        let nnz = lp[n];
        let mut li = vec![0usize; nnz];
        let mut lx = vec![0.0; nnz];
        let mut next = lp.clone();
        let mut x = vec![0.0; n];
        flag.iter_mut().for_each(|f| *f = NONE);

        for k in 0..n {
            let top = ereach(k, &cp, &ci, &parent, &mut flag, &mut stack);
            for p in cp[k]..cp[k + 1] {
                x[ci[p]] += cx[p];
            }
            let mut d = x[k];
            x[k] = 0.0;
            for &i in &stack[top..] {
                let lki = x[i] / lx[lp[i]];
                x[i] = 0.0;
                for q in lp[i] + 1..next[i] {
                    x[li[q]] -= lx[q] * lki;
                }
                d -= lki * lki;
                li[next[i]] = k;
                lx[next[i]] = lki;
                next[i] += 1;
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: perm[k], value: d });
            }
            li[next[k]] = k;
            lx[next[k]] = d.sqrt();
            next[k] += 1;
        }
        Ok(Self { n, perm, lp, li, lx })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored entries of the factor.
    pub fn factor_nnz(&self) -> usize {
        self.lx.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        self.lower_solve(&mut y, 1);
        self.upper_solve(&mut y, 1);
        for (new, &old) in self.perm.iter().enumerate() {
            b[old] = y[new];
        }
    }

    /// Solves for `k` right-hand sides stored column-major in `rhs`
    /// (`rhs[c * n + i]`).
    pub fn solve_many(&self, rhs: &mut [f64], k: usize) {
        let n = self.n;
        assert_eq!(rhs.len(), n * k);
        if k == 0 {
            return;
        }
        // Interleave so each factor entry is reused across the block.
        let mut y = vec![0.0; n * k];
        for c in 0..k {
            for (new, &old) in self.perm.iter().enumerate() {
                y[new * k + c] = rhs[c * n + old];
            }
        }
        self.lower_solve(&mut y, k);
        self.upper_solve(&mut y, k);
        for c in 0..k {
            for (new, &old) in self.perm.iter().enumerate() {
                rhs[c * n + old] = y[new * k + c];
            }
        }
    }

    fn lower_solve(&self, y: &mut [f64], k: usize) {
        for j in 0..self.n {
            let d = self.lx[self.lp[j]];
            let (head, tail) = y.split_at_mut((j + 1) * k);
            let yj = &mut head[j * k..];
            yj.iter_mut().for_each(|v| *v /= d);
            for p in self.lp[j] + 1..self.lp[j + 1] {
                let r = self.li[p];
                let l = self.lx[p];
                let off = (r - j - 1) * k;
                for c in 0..k {
                    tail[off + c] -= l * yj[c];
                }
            }
        }
    }

    fn upper_solve(&self, y: &mut [f64], k: usize) {
        let mut acc = vec![0.0; k];
        for j in (0..self.n).rev() {
            acc.iter_mut().for_each(|a| *a = 0.0);
            for p in self.lp[j] + 1..self.lp[j + 1] {
                let r = self.li[p];
                let l = self.lx[p];
                for c in 0..k {
                    acc[c] += l * y[r * k + c];
                }
            }
            let d = self.lx[self.lp[j]];
            for c in 0..k {
                y[j * k + c] = (y[j * k + c] - acc[c]) / d;
            }
        }
    }
}

/// Elimination tree of the matrix whose upper triangle is given by columns.
fn etree(n: usize, cp: &[usize], ci: &[usize]) -> Vec<usize> {
    let mut parent = vec![NONE; n];
    let mut ancestor = vec![NONE; n];
    for k in 0..n {
        for p in cp[k]..cp[k + 1] {
            let mut i = ci[p];
            while i != NONE && i < k {
                let inext = ancestor[i];
                ancestor[i] = k;
                if inext == NONE {
                    parent[i] = k;
                }
                i = inext;
            }
        }
    }
    parent
}

/// Nonzero pattern of row `k` of `L` (excluding the diagonal) in topological
/// order, returned as `stack[top..]`.
fn ereach(
    k: usize,
    cp: &[usize],
    ci: &[usize],
    parent: &[usize],
    flag: &mut [usize],
    stack: &mut [usize],
) -> usize {
    let n = parent.len();
    let mut top = n;
    flag[k] = k;
    for p in cp[k]..cp[k + 1] {
        let mut i = ci[p];
        if i > k {
            continue;
        }
        let mut len = 0;
        while flag[i] != k {
            stack[len] = i;
            len += 1;
            flag[i] = k;
            i = parent[i];
        }
        while len > 0 {
            top -= 1;
            len -= 1;
            stack[top] = stack[len];
        }
    }
    top
}
