//! Direct solve through the scalar-flux Schur complement.
//!
//! With `L_j = D_j + Σ_t` the per-direction streaming-collision operator, the
//! full system is equivalent to
//! `(I - Σ_j ω_j L_j^{-1} Σ_s) ρ = Σ_j ω_j L_j^{-1} b_j`, followed by
//! `f_j = L_j^{-1} (b_j + Σ_s ρ)`. Each `L_j^{-1}` is applied exactly by a sweep,
//! so the dense matrix above is assembled column by column and factored by LU.

use super::sweep::SweepContext;
use super::FomSolution;
use crate::dg::FomSystem;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, LU};
use rayon::prelude::*;

/// Refinement steps applied after the first solve; cheap next to the factorization.
const REFINEMENT_STEPS: usize = 2;

struct SchurSolver<'a> {
    ctx: SweepContext<'a>,
    lu: Option<LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
}

impl<'a> SchurSolver<'a> {
    fn new(sys: &'a FomSystem, mu: &[f64]) -> Result<Self> {
        let ctx = SweepContext::new(sys, mu)?;
        let nd = sys.n_dof();
        let n_loc = sys.space.n_loc();
        if ctx.scattering_free() {
            return Ok(Self { ctx, lu: None });
        }
        let cols: Vec<(usize, Vec<f64>)> = (0..nd)
            .into_par_iter()
            .filter_map(|i| {
                let e = i / n_loc;
                let k = i % n_loc;
                let blk = ctx.sigma_s.block(e);
                let mut src = vec![0.0; nd];
                let mut any = false;
                for r in 0..n_loc {
                    let v = blk[r * n_loc + k];
                    src[e * n_loc + r] = v;
                    any |= v != 0.0;
                }
                if !any {
                    return None;
                }
                Some(mean_inverse(&ctx, |_| &src[..]).map(|c| (i, c)))
            })
            .collect::<Result<_>>()?;
        let mut schur = DMatrix::<f64>::identity(nd, nd);
        for (i, c) in cols {
            for (r, v) in c.iter().enumerate() {
                schur[(r, i)] -= v;
            }
        }
        Ok(Self {
            ctx,
            lu: Some(schur.lu()),
        })
    }

    fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let sys = self.ctx.sys;
        let nd = sys.n_dof();
        let rho = match &self.lu {
            None => vec![0.0; nd],
            Some(lu) => {
                let rhs = mean_inverse(&self.ctx, |j| &b[j * nd..(j + 1) * nd])?;
                let sol = lu
                    .solve(&DVector::from_vec(rhs))
                    .ok_or(Error::SingularMatrix)?;
                if sol.iter().any(|x| !x.is_finite()) {
                    return Err(Error::SingularMatrix);
                }
                sol.as_slice().to_vec()
            }
        };
        let mut f = vec![0.0; sys.len()];
        self.ctx.sweep(&rho, b, &mut f)?;
        Ok(f)
    }
}

/// `Σ_j ω_j L_j^{-1} r_j`.
fn mean_inverse<'r>(ctx: &SweepContext<'_>, rhs: impl Fn(usize) -> &'r [f64]) -> Result<Vec<f64>> {
    let nd = ctx.sys.n_dof();
    let mut acc = vec![0.0; nd];
    let mut fj = vec![0.0; nd];
    for (j, w) in ctx.sys.quad.weights().iter().enumerate() {
        ctx.sweep_direction(j, rhs(j), &mut fj)?;
        for (a, x) in acc.iter_mut().zip(&fj) {
            *a += w * x;
        }
    }
    Ok(acc)
}

/// Exact solve of `A(mu) f = b(mu)`; intended for small systems.
pub fn solve_direct(sys: &FomSystem, mu: &[f64]) -> Result<FomSolution> {
    let solver = SchurSolver::new(sys, mu)?;
    let b = sys.rhs(mu);
    let mut f = solver.solve(&b)?;
    if solver.lu.is_some() {
        for _ in 0..REFINEMENT_STEPS {
            let r = sys.residual(mu, &f)?;
            let d = solver.solve(&r)?;
            for (x, dx) in f.iter_mut().zip(&d) {
                *x -= dx;
            }
        }
    }
    let rho = sys.scalar_flux(&f);
    Ok(FomSolution {
        f,
        rho,
        iterations: 1,
        last_change: 0.0,
    })
}
