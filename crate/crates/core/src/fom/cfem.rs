//! Continuous finite-element diffusion correction.
//!
//! Solves `-div((3 σ_t)^{-1} grad δ) + σ_a δ = σ_s (ρ_half - ρ_prev)` with continuous
//! bilinear (linear in 1D) finite elements on the transport mesh and homogeneous
//! Dirichlet conditions. The right-hand side is the exact integral of the DG
//! residual against each hat function, and the continuous correction is added to
//! the DG scalar flux through the exact embedding of each hat restricted to an
//! element into the local polynomial space.

use super::sweep::SweepContext;
use crate::error::{Error, Result};
use crate::linalg::banded::{BandCholesky, BandMatrix};
use crate::linalg::small::gemv_add;
use nalgebra::DMatrix;

pub struct ContinuousCorrection {
    dim: usize,
    cells: [usize; 2],
    n_loc: usize,
    /// `hat_to_dg[k * n_corner + c]`: DG coefficient `k` of corner hat `c`.
    hat_to_dg: Vec<f64>,
    n_corner: usize,
    factor: Option<BandCholesky>,
}

impl ContinuousCorrection {
    pub fn new(ctx: &SweepContext<'_>, mu: &[f64]) -> Result<Self> {
        let sys = ctx.sys;
        let space = &sys.space;
        let mesh = space.mesh();
        let dim = mesh.dim();
        let cells = mesh.cells();
        let n_loc = space.n_loc();
        let n_corner = 1 << dim;

        // L2 projection of each corner hat onto the local space
        let rule = space.element_rule(space.degree() + 2);
        let mut proj = DMatrix::zeros(n_loc, n_corner);
        for (xi, w) in &rule {
            let phi = space.basis_values(*xi);
            for c in 0..n_corner {
                let hat = corner_hat(c, *xi, dim);
                for k in 0..n_loc {
                    proj[(k, c)] += w * phi[k] * hat;
                }
            }
        }
        let mass = DMatrix::from_row_slice(n_loc, n_loc, space.local_mass());
        let coeffs = mass.lu().solve(&proj).ok_or(Error::SingularMatrix)?;
        let mut hat_to_dg = vec![0.0; n_loc * n_corner];
        for k in 0..n_loc {
            for c in 0..n_corner {
                hat_to_dg[k * n_corner + c] = coeffs[(k, c)];
            }
        }

        let (sig_s, sig_a) = sys.element_means(mu);
        let inner = [
            cells[0].saturating_sub(1),
            if dim == 2 {
                cells[1].saturating_sub(1)
            } else {
                1
            },
        ];
        let n_unknown = inner[0] * inner[1];
        let factor = if n_unknown == 0 || ctx.scattering_free() {
            None
        } else {
            let bw = if dim == 2 { inner[0] + 1 } else { 1 };
            let mut a = BandMatrix::zeros(n_unknown, bw);
            let hx = mesh.h(0);
            let hy = mesh.h(1);
            let k1 = |h: f64| [[1.0 / h, -1.0 / h], [-1.0 / h, 1.0 / h]];
            let m1 = |h: f64| [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]];
            let (kx, mx) = (k1(hx), m1(hx));
            let (ky, my) = if dim == 2 {
                (k1(hy), m1(hy))
            } else {
                ([[0.0; 2]; 2], [[1.0, 0.0], [0.0, 1.0]])
            };
            for e in 0..mesh.n_elements() {
                let sig_t = sig_s[e] + sig_a[e];
                if !(sig_t > 0.0) {
                    return Err(Error::SingularDiffusion { element: e });
                }
                let diff = 1.0 / (3.0 * sig_t);
                let nodes = corner_unknowns(mesh.ij(e), cells, dim);
                for c in 0..n_corner {
                    let Some(r) = nodes[c] else { continue };
                    let (a0, b0) = (c & 1, c >> 1);
                    for c2 in 0..=c {
                        let Some(s) = nodes[c2] else { continue };
                        let (a1, b1) = (c2 & 1, c2 >> 1);
                        let v = if dim == 2 {
                            diff * (kx[a0][a1] * my[b0][b1] + mx[a0][a1] * ky[b0][b1])
                                + sig_a[e] * mx[a0][a1] * my[b0][b1]
                        } else {
                            diff * kx[a0][a1] + sig_a[e] * mx[a0][a1]
                        };
                        // symmetric pair, stored once
                        a.add(r, s, v);
                    }
                }
            }
            Some(a.cholesky()?)
        };
        Ok(Self {
            dim,
            cells,
            n_loc,
            hat_to_dg,
            n_corner,
            factor,
        })
    }

    /// Adds the correction driven by `Σ_s (rho_half - rho_prev)` to `rho_half`.
    pub fn apply(&self, ctx: &SweepContext<'_>, rho_prev: &[f64], rho_half: &mut [f64]) {
        let Some(factor) = &self.factor else { return };
        let n = self.n_loc;
        let nc = self.n_corner;
        let diff: Vec<f64> = rho_half.iter().zip(rho_prev).map(|(a, b)| a - b).collect();
        let mut sdiff = vec![0.0; diff.len()];
        ctx.sigma_s.apply_add(&diff, 1.0, &mut sdiff);
        let mut rhs = vec![0.0; factor.len()];
        let n_el = self.cells[0] * if self.dim == 2 { self.cells[1] } else { 1 };
        for e in 0..n_el {
            let nodes =
                corner_unknowns((e % self.cells[0], e / self.cells[0]), self.cells, self.dim);
            let se = &sdiff[e * n..(e + 1) * n];
            for c in 0..nc {
                if let Some(r) = nodes[c] {
                    rhs[r] += (0..n)
                        .map(|k| self.hat_to_dg[k * nc + c] * se[k])
                        .sum::<f64>();
                }
            }
        }
        factor.solve(&mut rhs);
        let mut corner = vec![0.0; nc];
        for e in 0..n_el {
            let nodes =
                corner_unknowns((e % self.cells[0], e / self.cells[0]), self.cells, self.dim);
            for c in 0..nc {
                corner[c] = nodes[c].map_or(0.0, |r| rhs[r]);
            }
            gemv_add(
                &self.hat_to_dg,
                n,
                nc,
                &corner,
                1.0,
                &mut rho_half[e * n..(e + 1) * n],
            );
        }
    }
}

/// Bilinear hat of corner `c = a + 2 b` on the reference element.
fn corner_hat(c: usize, xi: [f64; 2], dim: usize) -> f64 {
    let f = |side: usize, t: f64| {
        if side == 0 {
            0.5 * (1.0 - t)
        } else {
            0.5 * (1.0 + t)
        }
    };
    let hx = f(c & 1, xi[0]);
    if dim == 2 {
        hx * f(c >> 1, xi[1])
    } else {
        hx
    }
}

/// Unknown index of each element corner, `None` on the Dirichlet boundary.
fn corner_unknowns((i, j): (usize, usize), cells: [usize; 2], dim: usize) -> [Option<usize>; 4] {
    let mut out = [None; 4];
    let nc = 1 << dim;
    for (c, slot) in out.iter_mut().enumerate().take(nc) {
        let (a, b) = (c & 1, c >> 1);
        let x = i + a;
        if x == 0 || x == cells[0] {
            continue;
        }
        if dim == 2 {
            let y = j + b;
            if y == 0 || y == cells[1] {
                continue;
            }
            *slot = Some((x - 1) + (cells[0] - 1) * (y - 1));
        } else {
            *slot = Some(x - 1);
        }
    }
    out
}
