//! Transport sweeps: per direction, march elements in upwind order and solve the
//! small local system `(D_j + Σ_t) f_e = rhs_e - coupling * f_upwind`.

use crate::dg::{BlockDiagonal, FomSystem};
use crate::error::{Error, Result};
use crate::linalg::small::{gemv_add, lu_factor, lu_solve};
use rayon::prelude::*;
use std::collections::HashMap;

/// Parameter-dependent data shared by all sweeps at one parameter value.
pub struct SweepContext<'a> {
    pub sys: &'a FomSystem,
    pub sigma_s: BlockDiagonal,
    pub sigma_t: BlockDiagonal,
    /// Elements grouped by identical collision block.
    class_of: Vec<u32>,
    class_first: Vec<usize>,
    scattering_free: bool,
}

impl<'a> SweepContext<'a> {
    pub fn new(sys: &'a FomSystem, mu: &[f64]) -> Result<Self> {
        sys.problem.check_parameter(mu)?;
        let sigma_s = sys.operator.scattering_blocks(mu);
        let mut sigma_t = sys.operator.absorption_blocks(mu);
        sigma_t.add_scaled(1.0, &sigma_s);
        let mut map: HashMap<Vec<u64>, u32> = HashMap::new();
        let mut class_of = Vec::with_capacity(sigma_t.n_blocks);
        let mut class_first = Vec::new();
        for e in 0..sigma_t.n_blocks {
            let key: Vec<u64> = sigma_t.block(e).iter().map(|x| x.to_bits()).collect();
            let next = map.len() as u32;
            let c = *map.entry(key).or_insert_with(|| {
                class_first.push(e);
                next
            });
            class_of.push(c);
        }
        let scattering_free = sigma_s.is_zero();
        Ok(Self {
            sys,
            sigma_s,
            sigma_t,
            class_of,
            class_first,
            scattering_free,
        })
    }

    pub fn scattering_free(&self) -> bool {
        self.scattering_free
    }

    /// Solves `(D_j + Σ_t) f_j = rhs_j` for one direction.
    pub fn sweep_direction(&self, j: usize, rhs: &[f64], f_j: &mut [f64]) -> Result<()> {
        let sys = self.sys;
        let n = sys.space.n_loc();
        let mesh = sys.space.mesh();
        let d = sys.operator.transport.direction(j);
        let nn = n * n;
        let mut lus = vec![0.0; self.class_first.len() * nn];
        let mut pivs = vec![0usize; self.class_first.len() * n];
        for (c, &e) in self.class_first.iter().enumerate() {
            let blk = &mut lus[c * nn..(c + 1) * nn];
            for ((b, x), y) in blk.iter_mut().zip(&d.diag).zip(self.sigma_t.block(e)) {
                *b = x + y;
            }
            if !lu_factor(blk, n, &mut pivs[c * n..(c + 1) * n]) {
                return Err(Error::SingularLocalBlock {
                    element: e,
                    direction: j,
                });
            }
        }
        let mut tmp = vec![0.0; n];
        for &e in sys.orderings[j].order.iter() {
            tmp.copy_from_slice(&rhs[e * n..(e + 1) * n]);
            for (axis, cpl) in d.coupling.iter().enumerate() {
                if let Some(u) = mesh.upwind_neighbor(e, axis, d.positive[axis]) {
                    gemv_add(cpl, n, n, &f_j[u * n..(u + 1) * n], -1.0, &mut tmp);
                }
            }
            let c = self.class_of[e] as usize;
            lu_solve(
                &lus[c * nn..(c + 1) * nn],
                n,
                &pivs[c * n..(c + 1) * n],
                &mut tmp,
            );
            f_j[e * n..(e + 1) * n].copy_from_slice(&tmp);
        }
        Ok(())
    }

    /// One sweep over all directions with scattering source `Σ_s rho` and data `b`.
    pub fn sweep(&self, rho: &[f64], b: &[f64], f: &mut [f64]) -> Result<()> {
        let nd = self.sys.n_dof();
        let mut src = vec![0.0; nd];
        if !self.scattering_free {
            self.sigma_s.apply_add(rho, 1.0, &mut src);
        }
        f.par_chunks_mut(nd).enumerate().try_for_each(|(j, fj)| {
            let rhs: Vec<f64> = b[j * nd..(j + 1) * nd]
                .iter()
                .zip(&src)
                .map(|(x, y)| x + y)
                .collect();
            self.sweep_direction(j, &rhs, fj)
        })
    }
}

/// One sweep at `mu` with scattering source built from `rho_prev`.
pub fn transport_sweep(sys: &FomSystem, mu: &[f64], rho_prev: &[f64]) -> Result<Vec<f64>> {
    if rho_prev.len() != sys.n_dof() {
        return Err(Error::DimensionMismatch {
            expected: sys.n_dof(),
            got: rho_prev.len(),
        });
    }
    let ctx = SweepContext::new(sys, mu)?;
    let mut f = vec![0.0; sys.len()];
    ctx.sweep(rho_prev, &sys.rhs(mu), &mut f)?;
    Ok(f)
}
