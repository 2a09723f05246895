//! The block-diagonal weighting `diag(ω_j M^{-1})` that turns the Euclidean norm of
//! an algebraic residual into the discrete L2 norm of the residual function, and
//! its factor `G` with `G^T G = diag(ω_j M^{-1})`.

use super::space::DgSpace;
use crate::linalg::small::{dot, gemv_add};
use nalgebra::DMatrix;

#[derive(Debug, Clone)]
pub struct WeightingMatrix {
    weights: Vec<f64>,
    sqrt_weights: Vec<f64>,
    n_dof: usize,
    n_loc: usize,
    /// Row-major local mass `M` and the inverse Cholesky factor `L^{-1}`
    /// (`M = L L^T`); `None` for an orthonormal basis.
    local: Option<(Vec<f64>, Vec<f64>)>,
}

impl WeightingMatrix {
    pub fn new(space: &DgSpace, weights: &[f64]) -> Self {
        let n = space.n_loc();
        let local = if space.has_identity_mass() {
            None
        } else {
            let m = DMatrix::from_row_slice(n, n, space.local_mass());
            let l = m
                .clone()
                .cholesky()
                .expect("local mass matrix is symmetric positive definite")
                .l();
            let linv = l
                .try_inverse()
                .expect("Cholesky factor of the mass matrix is invertible");
            let mut row = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    row[i * n + j] = linv[(i, j)];
                }
            }
            Some((space.local_mass().to_vec(), row))
        };
        Self {
            weights: weights.to_vec(),
            sqrt_weights: weights.iter().map(|w| w.sqrt()).collect(),
            n_dof: space.n_dof(),
            n_loc: n,
            local,
        }
    }

    pub fn len(&self) -> usize {
        self.n_dof * self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_diagonal(&self) -> bool {
        self.local.is_none()
    }

    /// `out = G r`.
    pub fn apply_into(&self, r: &[f64], out: &mut [f64]) {
        let nd = self.n_dof;
        let n = self.n_loc;
        for (j, sw) in self.sqrt_weights.iter().enumerate() {
            let rj = &r[j * nd..(j + 1) * nd];
            let oj = &mut out[j * nd..(j + 1) * nd];
            match &self.local {
                None => {
                    for (o, x) in oj.iter_mut().zip(rj) {
                        *o = sw * x;
                    }
                }
                Some((_, linv)) => {
                    oj.iter_mut().for_each(|x| *x = 0.0);
                    for e in 0..nd / n {
                        gemv_add(
                            linv,
                            n,
                            n,
                            &rj[e * n..(e + 1) * n],
                            *sw,
                            &mut oj[e * n..(e + 1) * n],
                        );
                    }
                }
            }
        }
    }

    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; r.len()];
        self.apply_into(r, &mut out);
        out
    }

    /// Discrete L2 norm of the angular function with coordinates `g`:
    /// `sqrt(Σ_j ω_j g_j^T M g_j)`.
    pub fn norm(&self, g: &[f64]) -> f64 {
        let nd = self.n_dof;
        let n = self.n_loc;
        let mut s = 0.0;
        for (j, w) in self.weights.iter().enumerate() {
            let gj = &g[j * nd..(j + 1) * nd];
            match &self.local {
                None => s += w * dot(gj, gj),
                Some((m, _)) => {
                    let mut t = 0.0;
                    let mut mg = vec![0.0; n];
                    for e in 0..nd / n {
                        mg.iter_mut().for_each(|x| *x = 0.0);
                        let ge = &gj[e * n..(e + 1) * n];
                        gemv_add(m, n, n, ge, 1.0, &mut mg);
                        t += dot(ge, &mg);
                    }
                    s += w * t;
                }
            }
        }
        s.sqrt()
    }

    /// `‖G r‖_2`, the discrete L2 norm of the residual function with coordinates
    /// `r` in the dual basis.
    pub fn residual_norm(&self, r: &[f64]) -> f64 {
        let g = self.apply(r);
        dot(&g, &g).sqrt()
    }

    /// Dense `N x N` factor, for small test problems.
    pub fn dense_factor(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut out = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for c in 0..n {
            e[c] = 1.0;
            let col = self.apply(&e);
            e[c] = 0.0;
            for r in 0..n {
                out[(r, c)] = col[r];
            }
        }
        out
    }
}
