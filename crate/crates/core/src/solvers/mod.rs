//! Poisson backends, smoothers, PCG and the auxiliary-space preconditioners.

mod fasp;
mod interface;
mod mixed;
mod pcg;
mod poisson;
mod smoother;

pub use fasp::{BiharmonicSystem, FaspOptions, FaspPreconditioner, PreconditionerKind};
pub use interface::{InterfaceKind, InterfacePreconditioner};
pub use mixed::{InterfaceMode, MixedInverse, MixedSolution};
pub use pcg::{pcg, PcgOptions, PcgOutcome};
pub use poisson::{PoissonBackend, PoissonKind};
pub use smoother::{Smoother, SmootherKind};
