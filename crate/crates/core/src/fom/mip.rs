//! Interior-penalty diffusion correction on the transport's own DG space.
//!
//! Symmetric interior penalty form with the penalty floored at 1/4, which keeps the
//! correction effective in optically thick elements where a continuous
//! discretization decouples from the DG transport limit:
//!
//! `a(u,v) = (D∇u,∇v) + (σ_a u,v)
//!         + Σ_int κ[[u]][[v]] - [[u]]{D∂_n v} - {D∂_n u}[[v]]
//!         + Σ_bnd κ u v - ½ u D∂_n v - ½ D∂_n u v`
//!
//! with `D = 1/(3 σ_t)` from element means and `κ = max(C/2 (D⁻/h⁻ + D⁺/h⁺), 1/4)`
//! (`C D/h` on the boundary).

use super::sweep::SweepContext;
use crate::dg::space::AxisBasis;
use crate::error::{Error, Result};
use crate::linalg::banded::{BandCholesky, BandMatrix};
use crate::quadrature::gauss_legendre;

/// One-dimensional pieces of the bilinear form on an element of one axis.
struct AxisPieces {
    n: usize,
    mass: Vec<f64>,
    /// `∫ ψ_k' ψ_l'`
    stiff: Vec<f64>,
    val: [Vec<f64>; 2],
    der: [Vec<f64>; 2],
}

impl AxisPieces {
    fn new(b: &AxisBasis) -> Self {
        let n = b.len();
        let (xq, wq) = gauss_legendre(n + 1);
        let mut stiff = vec![0.0; n * n];
        for (&x, &w) in xq.iter().zip(&wq) {
            let d: Vec<f64> = (0..n).map(|k| b.eval(k, x).1).collect();
            for k in 0..n {
                for l in 0..n {
                    stiff[k * n + l] += 0.5 * b.h() * w * d[k] * d[l];
                }
            }
        }
        let side = |xi: f64| -> (Vec<f64>, Vec<f64>) { (0..n).map(|k| b.eval(k, xi)).unzip() };
        let (vl, dl) = side(-1.0);
        let (vr, dr) = side(1.0);
        Self {
            n,
            mass: b.mass.clone(),
            stiff,
            val: [vl, vr],
            der: [dl, dr],
        }
    }
}

pub struct PenaltyCorrection {
    factor: BandCholesky,
}

impl PenaltyCorrection {
    pub fn new(ctx: &SweepContext<'_>, mu: &[f64]) -> Result<Self> {
        let sys = ctx.sys;
        let space = &sys.space;
        let mesh = space.mesh();
        let dim = mesh.dim();
        let [cx, cy] = mesh.cells();
        let n = space.n_loc();
        let n_el = mesh.n_elements();
        let px = AxisPieces::new(&space.ax);
        let py = if dim == 2 {
            Some(AxisPieces::new(&space.ay))
        } else {
            None
        };
        let c_pen = 2.0 * ((space.degree() + 1) as f64).powi(2);

        let (sig_s, sig_a) = sys.element_means(mu);
        let mut diff = Vec::with_capacity(n_el);
        for e in 0..n_el {
            let st = sig_s[e] + sig_a[e];
            if !(st > 0.0) {
                return Err(Error::SingularDiffusion { element: e });
            }
            diff.push(1.0 / (3.0 * st));
        }
        let absorption = sys.operator.absorption_blocks(mu);

        let bw = if dim == 2 {
            (cx + 1) * n - 1
        } else {
            2 * n - 1
        };
        let mut a = BandMatrix::zeros(n_el * n, bw);
        let unit = [1.0];
        let (my, ky): (&[f64], &[f64]) = match &py {
            Some(p) => (&p.mass, &p.stiff),
            None => (&unit, &[0.0]),
        };
        let vol_x = space.kron(&px.stiff, my);
        let vol_y = space.kron(&px.mass, ky);
        for e in 0..n_el {
            let sa = absorption.block(e);
            for k in 0..n {
                for l in 0..=k {
                    let v = diff[e] * (vol_x[k * n + l] + vol_y[k * n + l])
                        + 0.5 * (sa[k * n + l] + sa[l * n + k]);
                    a.add(e * n + k, e * n + l, v);
                }
            }
        }

        // faces normal to each axis: `along` carries the face matrices, `across` the
        // tangential mass
        let axes: Vec<(usize, &AxisPieces, &[f64])> = match &py {
            Some(p) => vec![(0, &px, &p.mass[..]), (1, p, &px.mass[..])],
            None => vec![(0, &px, &unit[..])],
        };
        for (axis, along, across) in axes {
            let h = mesh.h(axis);
            let tangential = |face: &[f64]| -> Vec<f64> {
                if axis == 0 {
                    space.kron(face, across)
                } else {
                    space.kron(across, face)
                }
            };
            let na = along.n;
            for e in 0..n_el {
                // interior face on the high side of e
                if let Some(r) = mesh.neighbor(e, axis, true) {
                    let kappa = (0.5 * c_pen * (diff[e] + diff[r]) / h).max(0.25);
                    // jump and normal-flux-average traces for the two sides
                    let jl: Vec<f64> = along.val[1].clone();
                    let fl: Vec<f64> = along.der[1].iter().map(|d| 0.5 * diff[e] * d).collect();
                    let jr: Vec<f64> = along.val[0].iter().map(|v| -v).collect();
                    let fr: Vec<f64> = along.der[0].iter().map(|d| 0.5 * diff[r] * d).collect();
                    let sides = [(e, &jl, &fl), (r, &jr, &fr)];
                    for &(ei, ji, fi) in &sides {
                        for &(ej, jj, fj) in &sides {
                            if ej > ei {
                                continue;
                            }
                            let mut face = vec![0.0; na * na];
                            for p in 0..na {
                                for q in 0..na {
                                    face[p * na + q] =
                                        kappa * ji[p] * jj[q] - jj[q] * fi[p] - fj[q] * ji[p];
                                }
                            }
                            let blk = tangential(&face);
                            for k in 0..n {
                                for l in 0..n {
                                    if ei == ej && l > k {
                                        continue;
                                    }
                                    a.add(ei * n + k, ej * n + l, blk[k * n + l]);
                                }
                            }
                        }
                    }
                }
                // boundary faces
                for high in [false, true] {
                    if mesh.neighbor(e, axis, high).is_some() {
                        continue;
                    }
                    let kappa = (c_pen * diff[e] / h).max(0.25);
                    let s = if high { 1 } else { 0 };
                    let sign = if high { 1.0 } else { -1.0 };
                    let v = &along.val[s];
                    let dn: Vec<f64> = along.der[s].iter().map(|d| sign * diff[e] * d).collect();
                    let mut face = vec![0.0; na * na];
                    for p in 0..na {
                        for q in 0..na {
                            face[p * na + q] =
                                kappa * v[p] * v[q] - 0.5 * v[q] * dn[p] - 0.5 * dn[q] * v[p];
                        }
                    }
                    let blk = tangential(&face);
                    for k in 0..n {
                        for l in 0..=k {
                            a.add(e * n + k, e * n + l, blk[k * n + l]);
                        }
                    }
                }
            }
        }
        let _ = cy;
        Ok(Self {
            factor: a.cholesky()?,
        })
    }

    /// Adds the correction driven by `Σ_s (rho_half - rho_prev)` to `rho_half`.
    pub fn apply(&self, ctx: &SweepContext<'_>, rho_prev: &[f64], rho_half: &mut [f64]) {
        let diff: Vec<f64> = rho_half.iter().zip(rho_prev).map(|(a, b)| a - b).collect();
        let mut rhs = vec![0.0; diff.len()];
        ctx.sigma_s.apply_add(&diff, 1.0, &mut rhs);
        self.factor.solve(&mut rhs);
        for (r, d) in rho_half.iter_mut().zip(&rhs) {
            *r += d;
        }
    }
}
