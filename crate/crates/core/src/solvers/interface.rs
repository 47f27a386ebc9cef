use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::Error;
use crate::operators::{BoundaryOperatorSet, LinearMap};

/// Preconditioners for the boundary Gram operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InterfaceKind {
    /// Segment-wise energies on the ring, `h^{-1}`-scaled mass at corners.
    SegmentEnergy,
    /// Full extension energy plus Gram on the ring, same corner part.
    RingEnergy,
    /// Full extension energy plus Gram on all boundary dofs.
    FullEnergy,
}

impl InterfaceKind {
    pub const ALL: [InterfaceKind; 3] = [Self::SegmentEnergy, Self::RingEnergy, Self::FullEnergy];

    pub fn name(self) -> &'static str {
        match self {
            Self::SegmentEnergy => "t1",
            Self::RingEnergy => "t2",
            Self::FullEnergy => "t3",
        }
    }
}

impl fmt::Display for InterfaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InterfaceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "t1" => Ok(Self::SegmentEnergy),
            "t2" => Ok(Self::RingEnergy),
            "t3" => Ok(Self::FullEnergy),
            _ => Err(Error::Config(format!("unknown interface preconditioner `{s}`"))),
        }
    }
}

/// A dual-to-primal boundary map, stored densely.
#[derive(Clone, Debug)]
pub struct InterfacePreconditioner {
    pub kind: InterfaceKind,
    pub matrix: DMatrix<f64>,
}

impl InterfacePreconditioner {
    /// `h` scales the corner block; pass the global mesh size.
    pub fn new(kind: InterfaceKind, ops: &BoundaryOperatorSet, h: f64) -> Self {
        let n = ops.dim();
        let ml = &ops.m_l;
        let mut t = DMatrix::zeros(n, n);
        match kind {
            InterfaceKind::FullEnergy => {
                for i in 0..n {
                    for j in 0..n {
                        t[(i, j)] = ops.f_q[(i, j)] / (ml[i] * ml[j]);
                    }
                }
            }
            InterfaceKind::SegmentEnergy | InterfaceKind::RingEnergy => {
                for (a, &i) in ops.ring.iter().enumerate() {
                    for (b, &j) in ops.ring.iter().enumerate() {
                        let q = if kind == InterfaceKind::SegmentEnergy { ops.d_q[(a, b)] } else { ops.f_q[(i, j)] };
                        t[(i, j)] = q / (ml[i] * ml[j]);
                    }
                }
                for &c in &ops.corners {
                    t[(c, c)] = 1.0 / (h * ml[c]);
                }
            }
        }
        Self { kind, matrix: t }
    }
}

impl LinearMap for InterfacePreconditioner {
    fn dim_in(&self) -> usize {
        self.matrix.ncols()
    }

    fn dim_out(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply(&self, r: &[f64]) -> Vec<f64> {
        self.matrix.apply(r)
    }
}
