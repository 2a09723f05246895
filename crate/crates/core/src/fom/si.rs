//! Source iteration on the scalar flux, optionally with a diffusion correction.

use super::dsa::DiffusionCorrection;
use super::sweep::SweepContext;
use super::{Acceleration, FomSolution, SiConfig};
use crate::dg::FomSystem;
use crate::error::{Error, Result};

/// Unaccelerated source iteration.
pub fn solve_si(sys: &FomSystem, mu: &[f64], cfg: &SiConfig) -> Result<FomSolution> {
    let cfg = SiConfig {
        acceleration: Acceleration::None,
        ..cfg.clone()
    };
    solve(sys, mu, &cfg)
}

/// Source iteration with the diffusion correction after every sweep.
pub fn solve_si_dsa(sys: &FomSystem, mu: &[f64], cfg: &SiConfig) -> Result<FomSolution> {
    let cfg = SiConfig {
        acceleration: Acceleration::Dsa,
        ..cfg.clone()
    };
    solve(sys, mu, &cfg)
}

pub(crate) fn solve(sys: &FomSystem, mu: &[f64], cfg: &SiConfig) -> Result<FomSolution> {
    cfg.validate()?;
    let nd = sys.n_dof();
    let ctx = SweepContext::new(sys, mu)?;
    let correction = match cfg.acceleration {
        Acceleration::Dsa if !ctx.scattering_free() => {
            Some(DiffusionCorrection::new(&ctx, mu, cfg.diffusion)?)
        }
        _ => None,
    };
    let mut rho = match &cfg.initial {
        Some(r) if r.len() != nd => {
            return Err(Error::DimensionMismatch {
                expected: nd,
                got: r.len(),
            })
        }
        Some(r) => r.clone(),
        None => vec![0.0; nd],
    };
    let b = sys.rhs(mu);
    let mut f = vec![0.0; sys.len()];
    let mut change = f64::INFINITY;
    for it in 1..=cfg.max_iterations {
        ctx.sweep(&rho, &b, &mut f)?;
        let mut next = sys.scalar_flux(&f);
        if ctx.scattering_free() {
            // no angular coupling: one sweep is the exact solve
            let change = max_diff(&next, &rho);
            return Ok(FomSolution {
                f,
                rho: next,
                iterations: 1,
                last_change: change,
            });
        }
        if let Some(c) = &correction {
            c.apply(&ctx, &rho, &mut next);
        }
        change = max_diff(&next, &rho);
        rho = next;
        log::trace!("SI iteration {it}: change {change:e}");
        if change < cfg.tol {
            // the returned flux is transported from the converged scalar flux
            ctx.sweep(&rho, &b, &mut f)?;
            let rho = sys.scalar_flux(&f);
            return Ok(FomSolution {
                f,
                rho,
                iterations: it,
                last_change: change,
            });
        }
        if !change.is_finite() {
            break;
        }
    }
    let rho = sys.scalar_flux(&f);
    Err(Error::NotConverged {
        iterations: cfg.max_iterations,
        change,
        last: Box::new(FomSolution {
            f,
            rho,
            iterations: cfg.max_iterations,
            last_change: change,
        }),
    })
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
