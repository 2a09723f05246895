//! A trained reduced model: the projection used for the online solve plus the
//! least-squares artifacts that evaluate residuals.

use crate::dg::FomSystem;
use crate::error::Result;
use crate::linalg::SnapshotBasis;
use crate::rom::{GalerkinRom, Indicator, LspgBuilder, LspgMode, LspgRom, Projection, RomKind};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

/// Online quantities at one parameter.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub c: DVector<f64>,
    /// `‖R⁻¹ c‖₁`, the reduced solution's size in snapshot coordinates.
    pub l1: f64,
    /// Weighted residual norm of `U c`.
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReducedModel {
    pub kind: RomKind,
    /// Least-squares variant; Galerkin models always evaluate residuals in
    /// standard mode.
    pub mode: LspgMode,
    pub galerkin: Option<GalerkinRom>,
    pub lspg: LspgRom,
}

impl ReducedModel {
    /// Least-squares mode of the artifacts for a given model kind.
    pub fn artifact_mode(kind: RomKind, mode: LspgMode) -> LspgMode {
        match kind.projection() {
            Projection::Galerkin => LspgMode::Standard,
            Projection::LeastSquares => mode,
        }
    }

    /// Offline stage on a finished basis, with a pivoted QR of the concatenation.
    pub fn offline(
        sys: &FomSystem,
        basis: &SnapshotBasis,
        kind: RomKind,
        mode: LspgMode,
    ) -> Result<Self> {
        let mut builder = LspgBuilder::new(sys);
        builder.extend(sys, basis)?;
        let galerkin = match kind.projection() {
            Projection::Galerkin => Some(GalerkinRom::offline(sys, basis)?),
            Projection::LeastSquares => None,
        };
        Ok(Self {
            kind,
            mode,
            galerkin,
            lspg: builder.build(Self::artifact_mode(kind, mode))?,
        })
    }

    pub fn dim(&self) -> usize {
        self.lspg.dim()
    }

    pub fn truncated(&self, m: usize) -> Self {
        Self {
            kind: self.kind,
            mode: self.mode,
            galerkin: self.galerkin.as_ref().map(|g| g.truncated(m)),
            lspg: self.lspg.truncated(m),
        }
    }

    pub fn solve(&self, mu: &[f64]) -> Result<DVector<f64>> {
        match &self.galerkin {
            Some(g) => g.solve(mu),
            None => self.lspg.solve(mu),
        }
    }

    pub fn evaluate(&self, mu: &[f64], basis: &SnapshotBasis) -> Result<Evaluation> {
        let (c, residual) = match &self.galerkin {
            Some(g) => {
                let c = g.solve(mu)?;
                let r = self.lspg.residual_norm(mu, c.as_slice())?;
                (c, r)
            }
            None => {
                let sol = self.lspg.solve_full(mu)?;
                let r = self.lspg.residual_of(mu, &sol)?;
                (sol.c, r)
            }
        };
        let l1 = basis
            .snapshot_coordinates(c.as_slice())?
            .iter()
            .map(|x| x.abs())
            .sum();
        Ok(Evaluation { c, l1, residual })
    }

    /// Indicator value driving the greedy selection.
    pub fn indicator(&self, e: &Evaluation) -> f64 {
        match self.kind.indicator() {
            Indicator::L1 => e.l1,
            Indicator::Residual => e.residual,
        }
    }

    /// Condition number of the reduced matrix factored online.
    pub fn condition(&self, mu: &[f64]) -> f64 {
        match &self.galerkin {
            Some(g) => g.condition(mu),
            None => self.lspg.condition(mu),
        }
    }
}
