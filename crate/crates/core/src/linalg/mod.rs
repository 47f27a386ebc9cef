//! Sparse and dense linear algebra used throughout the crate.

pub mod cholesky;
pub mod ordering;
pub mod sparse;
pub mod vector;

pub use cholesky::SparseCholesky;
pub use sparse::{CsrMatrix, TripletBuilder};
