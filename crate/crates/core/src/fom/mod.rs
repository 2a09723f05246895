//! Full-order solvers.

pub mod cfem;
pub mod direct;
pub mod dsa;
pub mod mip;
pub mod si;
pub mod sweep;

pub use direct::solve_direct;
pub use si::{solve_si, solve_si_dsa};
pub use sweep::{transport_sweep, SweepContext};

use crate::dg::FomSystem;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct FomSolution {
    pub f: Vec<f64>,
    pub rho: Vec<f64>,
    pub iterations: usize,
    pub last_change: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Acceleration {
    None,
    Dsa,
}

/// Discretization of the diffusion correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DiffusionScheme {
    /// Symmetric interior penalty on the transport DG space.
    #[default]
    InteriorPenalty,
    /// Continuous Q1 (P1 in 1D) elements with zero Dirichlet data.
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiConfig {
    /// Stop once the max-norm change of the scalar flux drops below this.
    pub tol: f64,
    pub max_iterations: usize,
    pub acceleration: Acceleration,
    #[serde(default)]
    pub diffusion: DiffusionScheme,
    /// Starting scalar flux; zero when absent.
    #[serde(skip)]
    pub initial: Option<Vec<f64>>,
}

impl Default for SiConfig {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iterations: 10_000,
            acceleration: Acceleration::Dsa,
            diffusion: DiffusionScheme::default(),
            initial: None,
        }
    }
}

impl SiConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!(
                "SI tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("SI needs at least one iteration".into()));
        }
        Ok(())
    }
}

/// Choice of full-order solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FomMethod {
    Direct,
    SourceIteration(SiConfig),
}

impl FomMethod {
    pub fn solve(&self, sys: &FomSystem, mu: &[f64]) -> Result<FomSolution> {
        match self {
            FomMethod::Direct => solve_direct(sys, mu),
            FomMethod::SourceIteration(cfg) => si::solve(sys, mu, cfg),
        }
    }

    /// Same method with a different starting scalar flux (ignored by direct solves).
    pub fn with_initial(&self, rho0: Option<Vec<f64>>) -> Self {
        match self {
            FomMethod::Direct => FomMethod::Direct,
            FomMethod::SourceIteration(cfg) => FomMethod::SourceIteration(SiConfig {
                initial: rho0,
                ..cfg.clone()
            }),
        }
    }
}
