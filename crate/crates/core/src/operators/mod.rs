//! Matrix-free operators on the P1, boundary and Morley spaces.

mod boundary;
mod extension;
mod laplacian;
mod transfer;

pub use boundary::{BoundaryOperatorSet, DENSE_BUDGET};
pub use extension::HarmonicExtender;
pub use laplacian::DiscreteLaplacians;
pub use transfer::{p1_to_morley, vertex_injection};

use nalgebra::DMatrix;

use crate::linalg::CsrMatrix;

/// A linear operator known only through its action.
pub trait LinearMap {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
}

impl LinearMap for CsrMatrix {
    fn dim_in(&self) -> usize {
        self.ncols()
    }

    fn dim_out(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.mul_vec(x)
    }
}

impl LinearMap for DMatrix<f64> {
    fn dim_in(&self) -> usize {
        self.ncols()
    }

    fn dim_out(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let v = self * nalgebra::DVector::from_column_slice(x);
        v.as_slice().to_vec()
    }
}

impl<T: LinearMap + ?Sized> LinearMap for &T {
    fn dim_in(&self) -> usize {
        (**self).dim_in()
    }

    fn dim_out(&self) -> usize {
        (**self).dim_out()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (**self).apply(x)
    }
}

/// Wraps a closure as a [`LinearMap`].
pub struct FnMap<F> {
    n_in: usize,
    n_out: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> Vec<f64>> FnMap<F> {
    pub fn new(n_in: usize, n_out: usize, f: F) -> Self {
        Self { n_in, n_out, f }
    }

    pub fn square(n: usize, f: F) -> Self {
        Self::new(n, n, f)
    }
}

impl<F: Fn(&[f64]) -> Vec<f64>> LinearMap for FnMap<F> {
    fn dim_in(&self) -> usize {
        self.n_in
    }

    fn dim_out(&self) -> usize {
        self.n_out
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_in);
        (self.f)(x)
    }
}

/// Identity on `R^n`.
pub struct Identity(pub usize);

impl LinearMap for Identity {
    fn dim_in(&self) -> usize {
        self.0
    }

    fn dim_out(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }
}

/// Relative defect `‖L(αx+βy) − αLx − βLy‖ / (|α|‖Lx‖ + |β|‖Ly‖)`.
pub fn linearity_defect(map: &dyn LinearMap, x: &[f64], y: &[f64], alpha: f64, beta: f64) -> f64 {
    use crate::linalg::vector::norm;
    let combo: Vec<f64> = x.iter().zip(y).map(|(a, b)| alpha * a + beta * b).collect();
    let lx = map.apply(x);
    let ly = map.apply(y);
    let lc = map.apply(&combo);
    let diff: Vec<f64> = (0..lc.len()).map(|i| lc[i] - alpha * lx[i] - beta * ly[i]).collect();
    norm(&diff) / (alpha.abs() * norm(&lx) + beta.abs() * norm(&ly)).max(f64::MIN_POSITIVE)
}

/// Dense matrix of a map, one column per unit vector.
pub fn materialize(map: &dyn LinearMap) -> DMatrix<f64> {
    let n = map.dim_in();
    let mut out = DMatrix::zeros(map.dim_out(), n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = map.apply(&e);
        out.column_mut(j).copy_from_slice(&col);
        e[j] = 0.0;
    }
    out
}
