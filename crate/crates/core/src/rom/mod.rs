//! Reduced-order models on a snapshot basis: Galerkin and least-squares
//! Petrov-Galerkin projection, with offline/online splitting through the affine
//! parameter dependence.

pub mod galerkin;
pub mod lspg;
pub mod oracle;

pub use galerkin::GalerkinRom;
pub use lspg::{LspgBuilder, LspgMode, LspgRom, LspgSolution};

use crate::dg::FomSystem;
use crate::error::{Error, Result};
use crate::problem::Coefficient;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Parameter coefficients `θ^A` (operator terms, transport first) and `θ^b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineCoefficients {
    pub operator: Vec<Coefficient>,
    pub data: Vec<Coefficient>,
}

impl AffineCoefficients {
    pub fn of(sys: &FomSystem) -> Self {
        let op = &sys.operator;
        let operator = std::iter::once(Coefficient::Constant(1.0))
            .chain(op.scattering.iter().map(|t| t.coefficient.clone()))
            .chain(op.absorption.iter().map(|t| t.coefficient.clone()))
            .collect();
        Self {
            operator,
            data: sys.data.coefficients.clone(),
        }
    }

    pub fn q_a(&self) -> usize {
        self.operator.len()
    }

    pub fn q_b(&self) -> usize {
        self.data.len()
    }

    pub fn theta_a(&self, mu: &[f64]) -> Vec<f64> {
        self.operator.iter().map(|c| c.eval(mu)).collect()
    }

    pub fn theta_b(&self, mu: &[f64]) -> Vec<f64> {
        self.data.iter().map(|c| c.eval(mu)).collect()
    }
}

/// Projection used for the reduced solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Projection {
    Galerkin,
    LeastSquares,
}

/// Error indicator driving the greedy selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Indicator {
    L1,
    Residual,
}

/// The four reduced models: projection crossed with indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RomKind {
    GL1,
    GRes,
    PgL1,
    PgRes,
}

impl RomKind {
    pub const ALL: [RomKind; 4] = [RomKind::GL1, RomKind::GRes, RomKind::PgL1, RomKind::PgRes];

    pub fn projection(self) -> Projection {
        match self {
            RomKind::GL1 | RomKind::GRes => Projection::Galerkin,
            RomKind::PgL1 | RomKind::PgRes => Projection::LeastSquares,
        }
    }

    pub fn indicator(self) -> Indicator {
        match self {
            RomKind::GL1 | RomKind::PgL1 => Indicator::L1,
            RomKind::GRes | RomKind::PgRes => Indicator::Residual,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RomKind::GL1 => "g-l1",
            RomKind::GRes => "g-res",
            RomKind::PgL1 => "pg-l1",
            RomKind::PgRes => "pg-res",
        }
    }
}

impl fmt::Display for RomKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RomKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RomKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown ROM '{s}' (expected g-l1, g-res, pg-l1 or pg-res)"
                ))
            })
    }
}

/// Online reduced solver of either projection type.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ReducedSolver {
    Galerkin(GalerkinRom),
    LeastSquares(LspgRom),
}

impl ReducedSolver {
    pub fn dim(&self) -> usize {
        match self {
            ReducedSolver::Galerkin(g) => g.dim(),
            ReducedSolver::LeastSquares(p) => p.dim(),
        }
    }

    pub fn solve(&self, mu: &[f64]) -> Result<DVector<f64>> {
        match self {
            ReducedSolver::Galerkin(g) => g.solve(mu),
            ReducedSolver::LeastSquares(p) => p.solve(mu),
        }
    }

    /// 2-norm condition number of the matrix factored online.
    pub fn condition(&self, mu: &[f64]) -> f64 {
        match self {
            ReducedSolver::Galerkin(g) => g.condition(mu),
            ReducedSolver::LeastSquares(p) => p.condition(mu),
        }
    }
}
