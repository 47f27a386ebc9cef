use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::mixed::{InterfaceMode, MixedInverse};
use super::poisson::{PoissonBackend, PoissonKind};
use super::smoother::{Smoother, SmootherKind};
use crate::assembly::{assemble_morley, load_vector_morley, P1Matrices};
use crate::error::{Error, Result};
use crate::linalg::vector::add;
use crate::linalg::CsrMatrix;
use crate::mesh::{Mesh, Point};
use crate::operators::{p1_to_morley, BoundaryOperatorSet, HarmonicExtender, LinearMap};
use crate::spaces::{MorleyBc, MorleySpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PreconditionerKind {
    /// Simply supported plate: smoother plus squared Dirichlet Laplacian.
    SecondKind,
    /// Clamped plate with the second-kind auxiliary problem (suboptimal).
    FirstKindPlain,
    /// Clamped plate with the mixed first-kind auxiliary problem.
    FirstKind,
    SmootherOnly,
}

impl PreconditionerKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::SecondKind => "bh2",
            Self::FirstKindPlain => "bh1-prime",
            Self::FirstKind => "bh1",
            Self::SmootherOnly => "smoother",
        }
    }

    /// Boundary condition the preconditioner is designed for, if restricted.
    pub fn required_bc(self) -> Option<MorleyBc> {
        match self {
            Self::SecondKind => Some(MorleyBc::Second),
            Self::FirstKindPlain | Self::FirstKind => Some(MorleyBc::First),
            Self::SmootherOnly => None,
        }
    }
}

impl fmt::Display for PreconditionerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PreconditionerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bh2" => Ok(Self::SecondKind),
            "bh1-prime" => Ok(Self::FirstKindPlain),
            "bh1" => Ok(Self::FirstKind),
            "smoother" => Ok(Self::SmootherOnly),
            _ => Err(Error::Config(format!("unknown preconditioner `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FaspOptions {
    pub smoother: SmootherKind,
    pub interface: InterfaceMode,
}

/// A Morley plate problem together with the P1 data its preconditioners use.
#[derive(Clone, Debug)]
pub struct BiharmonicSystem {
    pub mesh: Arc<Mesh>,
    pub space: MorleySpace,
    pub matrix: Arc<CsrMatrix>,
    pub p1: Arc<P1Matrices>,
    pub dirichlet: Arc<PoissonBackend>,
}

impl BiharmonicSystem {
    pub fn new(mesh: Mesh, bc: MorleyBc, poisson: PoissonKind) -> Result<Self> {
        let space = MorleySpace::build(&mesh, bc);
        let matrix = Arc::new(assemble_morley(&mesh, &space)?);
        let p1 = Arc::new(P1Matrices::assemble(&mesh));
        let dirichlet = Arc::new(PoissonBackend::new(&p1.a_d, poisson)?);
        Ok(Self { mesh: Arc::new(mesh), space, matrix, p1, dirichlet })
    }

    pub fn dim(&self) -> usize {
        self.space.n_dofs()
    }

    pub fn load(&self, f: impl Fn(Point) -> f64) -> Result<Vec<f64>> {
        load_vector_morley(&self.mesh, &self.space, f)
    }

    pub fn extender(&self) -> Arc<HarmonicExtender> {
        Arc::new(HarmonicExtender::new(self.p1.clone(), self.dirichlet.clone()))
    }

    pub fn preconditioner(&self, kind: PreconditionerKind, opts: FaspOptions) -> Result<FaspPreconditioner> {
        if let Some(bc) = kind.required_bc() {
            if bc != self.space.bc {
                return Err(Error::Config(format!("preconditioner {kind} needs the {bc:?} boundary condition")));
            }
        }
        let smoother = Smoother::new(self.matrix.clone(), opts.smoother);
        let transfer = p1_to_morley(&self.mesh, &self.space, &self.p1.interior);
        let aux = match kind {
            PreconditionerKind::SmootherOnly => Auxiliary::None,
            PreconditionerKind::SecondKind | PreconditionerKind::FirstKindPlain => {
                Auxiliary::SquaredDirichlet { p1: self.p1.clone(), solver: self.dirichlet.clone() }
            }
            PreconditionerKind::FirstKind => {
                let ext = self.extender();
                let ops = Arc::new(BoundaryOperatorSet::build(&ext)?);
                Auxiliary::Mixed(MixedInverse::new(ext, ops, opts.interface, self.mesh.h())?)
            }
        };
        Ok(FaspPreconditioner { kind, smoother, transfer, aux })
    }
}

#[derive(Clone, Debug)]
enum Auxiliary {
    None,
    /// `A_D^{-1} M_0 A_D^{-1}`.
    SquaredDirichlet { p1: Arc<P1Matrices>, solver: Arc<PoissonBackend> },
    Mixed(MixedInverse),
}

/// Smoother plus transfer of an auxiliary P1 inverse, as a dual-to-primal
/// map on Morley coefficients.
#[derive(Clone, Debug)]
pub struct FaspPreconditioner {
    pub kind: PreconditionerKind,
    smoother: Smoother,
    /// Morley rows, interior P1 columns.
    transfer: CsrMatrix,
    aux: Auxiliary,
}

impl FaspPreconditioner {
    /// The smoother and auxiliary-space contributions separately.
    pub fn try_apply_parts(&self, r: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let smooth = self.smoother.apply(r);
        let g = self.transfer.tr_mul_vec(r);
        let inner = match &self.aux {
            Auxiliary::None => return Ok((smooth, vec![0.0; r.len()])),
            Auxiliary::SquaredDirichlet { p1, solver } => solver.solve(&p1.m_0.mul_vec(&solver.solve(&g))),
            Auxiliary::Mixed(m) => m.solve(&g)?.u,
        };
        Ok((smooth, self.transfer.mul_vec(&inner)))
    }

    pub fn try_apply(&self, r: &[f64]) -> Result<Vec<f64>> {
        let (s, a) = self.try_apply_parts(r)?;
        Ok(add(&s, &a))
    }

    pub fn transfer(&self) -> &CsrMatrix {
        &self.transfer
    }
}

impl LinearMap for FaspPreconditioner {
    fn dim_in(&self) -> usize {
        self.transfer.nrows()
    }

    fn dim_out(&self) -> usize {
        self.transfer.nrows()
    }

    fn apply(&self, r: &[f64]) -> Vec<f64> {
        match self.try_apply(r) {
            Ok(x) => x,
            Err(e) => panic!("preconditioner {} failed: {e}", self.kind),
        }
    }
}
