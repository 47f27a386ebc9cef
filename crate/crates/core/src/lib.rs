//! Morley finite elements for the clamped and simply supported plate
//! problems, together with auxiliary-space preconditioners that reduce each
//! application to a few Poisson solves and one boundary interface solve.
//!
//! The pieces, bottom-up:
//!
//! * [`mesh`]: built-in polygonal domains, uniform refinement, edge frames.
//! * [`spaces`]: degree-of-freedom maps for P1, boundary trace and Morley spaces.
//! * [`assembly`]: stiffness, mass, Morley Hessian and load assembly.
//! * [`operators`]: discrete Laplacians, harmonic extension, boundary
//!   interface operators and the P1/Morley transfers.
//! * [`solvers`]: PCG, smoothers, Poisson backends and the preconditioners.
//! * [`spectra`]: dense and Lanczos spectra, (effective) condition numbers.
//! * [`experiment`]: the declarative experiment runner behind the `solver` CLI.

pub mod assembly;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod mesh;
pub mod operators;
pub mod solvers;
pub mod spaces;
pub mod spectra;

pub use error::{Error, Result};
