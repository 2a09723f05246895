//! Economy Householder QR with column pivoting, `B P = Q R`, for tall matrices
//! stored by columns. `Q` is kept as reflectors and applied on demand.

use super::small::dot;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rayon::prelude::*;

/// Default relative threshold on `|R_kk| / |R_11|` for the numerical rank.
pub const RANK_TOL: f64 = 1e-13;

/// Downdated squared norms below this fraction of their last exact value are recomputed.
const REFRESH: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct PivotedQr {
    rows: usize,
    /// `s x n_cols`, columns in pivoted order.
    r: DMatrix<f64>,
    /// `perm[k]` is the original index of pivoted column `k`.
    perm: Vec<usize>,
    /// Householder vectors `v_k` occupying rows `k..`; `H_k = I - 2 v vᵀ / vᵀv`.
    reflectors: Vec<Vec<f64>>,
}

impl PivotedQr {
    /// Factors the columns of `B` with the default rank threshold.
    pub fn new(columns: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_tolerance(columns, RANK_TOL)
    }

    pub fn with_tolerance(mut cols: Vec<Vec<f64>>, rank_tol: f64) -> Result<Self> {
        let n_cols = cols.len();
        let rows = cols.first().map_or(0, |c| c.len());
        if cols.iter().any(|c| c.len() != rows) {
            return Err(Error::Config("columns of unequal length".into()));
        }
        if rows < n_cols {
            return Err(Error::Config(format!(
                "pivoted QR needs at least as many rows as columns ({rows} < {n_cols})"
            )));
        }
        let mut perm: Vec<usize> = (0..n_cols).collect();
        let mut norms: Vec<f64> = cols.iter().map(|c| dot(c, c)).collect();
        let mut exact = norms.clone();
        let mut diag = Vec::with_capacity(n_cols);
        let mut r11 = 0.0;
        for k in 0..n_cols {
            let p = (k..n_cols).fold(k, |best, j| if norms[j] > norms[best] { j } else { best });
            cols.swap(k, p);
            perm.swap(k, p);
            norms.swap(k, p);
            exact.swap(k, p);
            let x = &cols[k][k..];
            let xnorm = dot(x, x).sqrt();
            if k == 0 {
                if xnorm == 0.0 {
                    return Err(Error::ZeroMatrix);
                }
                r11 = xnorm;
            }
            if xnorm <= rank_tol * r11 {
                break;
            }
            let alpha = if x[0] >= 0.0 { -xnorm } else { xnorm };
            let (head, tail) = cols.split_at_mut(k + 1);
            let v = &mut head[k];
            v[k] -= alpha;
            let vv = dot(&v[k..], &v[k..]);
            let v = &*v;
            tail.par_iter_mut().for_each(|c| {
                let f = 2.0 * dot(&v[k..], &c[k..]) / vv;
                for (ci, vi) in c[k..].iter_mut().zip(&v[k..]) {
                    *ci -= f * vi;
                }
            });
            for j in k + 1..n_cols {
                let t = cols[j][k];
                norms[j] -= t * t;
                if norms[j] < REFRESH * exact[j] {
                    let rest = &cols[j][k + 1..];
                    norms[j] = dot(rest, rest);
                    exact[j] = norms[j];
                }
            }
            diag.push(alpha);
        }
        let s = diag.len();
        let r = DMatrix::from_fn(s, n_cols, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Equal => diag[i],
            std::cmp::Ordering::Less => cols[j][i],
            std::cmp::Ordering::Greater => 0.0,
        });
        cols.truncate(s);
        Ok(Self {
            rows,
            r,
            perm,
            reflectors: cols,
        })
    }

    /// Numerical rank `s`.
    pub fn rank(&self) -> usize {
        self.r.nrows()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// `R Pᵀ`, i.e. `Qᵀ B` with columns back in the original order.
    pub fn r_unpermuted(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.rank(), self.perm.len());
        for (k, &orig) in self.perm.iter().enumerate() {
            out.set_column(orig, &self.r.column(k));
        }
        out
    }

    fn reflect(&self, k: usize, y: &mut [f64]) {
        let v = &self.reflectors[k][k..];
        let vv = dot(v, v);
        let f = 2.0 * dot(v, &y[k..]) / vv;
        for (yi, vi) in y[k..].iter_mut().zip(v) {
            *yi -= f * vi;
        }
    }

    /// `Qᵀ y` (length `s`).
    pub fn apply_qt(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: y.len(),
            });
        }
        let mut w = y.to_vec();
        for k in 0..self.rank() {
            self.reflect(k, &mut w);
        }
        w.truncate(self.rank());
        Ok(w)
    }

    /// `Q x` (length `N`).
    pub fn apply_q(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                got: x.len(),
            });
        }
        let mut w = vec![0.0; self.rows];
        w[..x.len()].copy_from_slice(x);
        for k in (0..self.rank()).rev() {
            self.reflect(k, &mut w);
        }
        Ok(w)
    }

    /// Explicit `Q` by columns; for checks on small problems.
    pub fn q_columns(&self) -> Vec<Vec<f64>> {
        let s = self.rank();
        (0..s)
            .map(|i| {
                let mut e = vec![0.0; s];
                e[i] = 1.0;
                self.apply_q(&e).expect("length matches rank")
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormal_columns_give_unit_r() {
        let cols = vec![vec![0.0, 1.0, 0.0, 0.0], vec![0.6, 0.0, 0.8, 0.0]];
        let qr = PivotedQr::new(cols).unwrap();
        assert_eq!(qr.rank(), 2);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((qr.r()[(i, j)].abs() - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn repeated_direction_has_rank_one() {
        let c = vec![1.0, -2.0, 0.5, 3.0];
        let c2: Vec<f64> = c.iter().map(|x| 2.0 * x).collect();
        let qr = PivotedQr::new(vec![c, c2]).unwrap();
        assert_eq!(qr.rank(), 1);
        assert_eq!(qr.perm()[0], 1);
    }

    #[test]
    fn zero_matrix_rejected() {
        assert!(matches!(
            PivotedQr::new(vec![vec![0.0; 3]; 2]),
            Err(Error::ZeroMatrix)
        ));
    }

    #[test]
    fn wide_matrix_rejected() {
        assert!(PivotedQr::new(vec![vec![1.0, 2.0]; 3]).is_err());
    }

    #[test]
    fn q_roundtrip() {
        let cols = vec![
            vec![1.0, 2.0, 3.0, 4.0, 5.0],
            vec![1.0, 0.0, -1.0, 2.0, 0.5],
        ];
        let qr = PivotedQr::new(cols.clone()).unwrap();
        let y = vec![0.3, -1.0, 2.0, 0.0, 1.0];
        let x = qr.apply_qt(&y).unwrap();
        let back = qr.apply_qt(&qr.apply_q(&x).unwrap()).unwrap();
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-14);
        }
        // Qᵀ B equals R Pᵀ
        let rp = qr.r_unpermuted();
        for (j, c) in cols.iter().enumerate() {
            let qtc = qr.apply_qt(c).unwrap();
            for i in 0..2 {
                assert!((qtc[i] - rp[(i, j)]).abs() < 1e-13);
            }
        }
    }
}
