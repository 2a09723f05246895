//! Diffusion synthetic acceleration: after each sweep the scalar flux is corrected by
//! the solution of
//! `-div((3 σ_t)^{-1} grad δ) + σ_a δ = σ_s (ρ_half - ρ_prev)`.

use super::cfem::ContinuousCorrection;
use super::mip::PenaltyCorrection;
use super::sweep::SweepContext;
use super::DiffusionScheme;
use crate::error::Result;

pub enum DiffusionCorrection {
    Continuous(ContinuousCorrection),
    Penalty(PenaltyCorrection),
}

impl DiffusionCorrection {
    /// Assembles and factors the diffusion operator at `mu`.
    pub fn new(ctx: &SweepContext<'_>, mu: &[f64], scheme: DiffusionScheme) -> Result<Self> {
        Ok(match scheme {
            DiffusionScheme::Continuous => Self::Continuous(ContinuousCorrection::new(ctx, mu)?),
            DiffusionScheme::InteriorPenalty => Self::Penalty(PenaltyCorrection::new(ctx, mu)?),
        })
    }

    pub fn apply(&self, ctx: &SweepContext<'_>, rho_prev: &[f64], rho_half: &mut [f64]) {
        match self {
            Self::Continuous(c) => c.apply(ctx, rho_prev, rho_half),
            Self::Penalty(c) => c.apply(ctx, rho_prev, rho_half),
        }
    }
}
