//! Incremental QR of the snapshot matrix `F = U R` by classical Gram-Schmidt with one
//! reorthogonalization pass.

use super::small::{axpy, dot, norm2};
use crate::error::{Error, Result};
use crate::problem::Parameter;
use nalgebra::DMatrix;

/// Remainders below this fraction of the incoming column are treated as dependent.
pub const DEPENDENCE_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Default)]
pub struct SnapshotBasis {
    len: usize,
    snapshots: Vec<Vec<f64>>,
    u: Vec<Vec<f64>>,
    /// Column `j` of the upper-triangular factor, entries `0..=j`.
    r: Vec<Vec<f64>>,
    params: Vec<Parameter>,
}

impl SnapshotBasis {
    pub fn new(len: usize) -> Self {
        Self {
            len,
            ..Default::default()
        }
    }

    /// Rebuilds a basis from stored factors without re-orthogonalizing.
    pub fn from_parts(
        snapshots: Vec<Vec<f64>>,
        u: Vec<Vec<f64>>,
        r: Vec<Vec<f64>>,
        params: Vec<Parameter>,
    ) -> Result<Self> {
        let m = u.len();
        let len = u.first().map_or(0, |c| c.len());
        let shapes_ok = snapshots.len() == m
            && r.len() == m
            && params.len() == m
            && r.iter().enumerate().all(|(j, c)| c.len() == j + 1)
            && u.iter().chain(&snapshots).all(|c| c.len() == len);
        if !shapes_ok {
            return Err(Error::Config("inconsistent snapshot basis parts".into()));
        }
        Ok(Self {
            len,
            snapshots,
            u,
            r,
            params,
        })
    }

    /// Full-order length `N`.
    pub fn len(&self) -> usize {
        self.len
    }

    /// Number of basis vectors `m`.
    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn u(&self) -> &[Vec<f64>] {
        &self.u
    }

    pub fn snapshots(&self) -> &[Vec<f64>] {
        &self.snapshots
    }

    pub fn params(&self) -> &[Parameter] {
        &self.params
    }

    pub fn r_columns(&self) -> &[Vec<f64>] {
        &self.r
    }

    pub fn r_upper(&self) -> DMatrix<f64> {
        let m = self.dim();
        DMatrix::from_fn(m, m, |i, j| if i <= j { self.r[j][i] } else { 0.0 })
    }

    /// Appends a snapshot taken at `mu`. On near dependence the basis is unchanged.
    pub fn append(&mut self, column: Vec<f64>, mu: Parameter) -> Result<()> {
        if column.len() != self.len {
            return Err(Error::DimensionMismatch {
                expected: self.len,
                got: column.len(),
            });
        }
        let scale = norm2(&column);
        let mut v = column.clone();
        let mut coeffs = vec![0.0; self.dim()];
        for _pass in 0..2 {
            let proj: Vec<f64> = self.u.iter().map(|q| dot(q, &v)).collect();
            for (q, p) in self.u.iter().zip(&proj) {
                axpy(-p, q, &mut v);
            }
            for (c, p) in coeffs.iter_mut().zip(&proj) {
                *c += p;
            }
        }
        let rest = norm2(&v);
        if !(rest > DEPENDENCE_TOL * scale) {
            let ratio = if scale > 0.0 { rest / scale } else { 0.0 };
            return Err(Error::NearDependence { ratio });
        }
        v.iter_mut().for_each(|x| *x /= rest);
        coeffs.push(rest);
        self.u.push(v);
        self.r.push(coeffs);
        self.snapshots.push(column);
        self.params.push(mu);
        Ok(())
    }

    /// Singular values of `F` in decreasing order, from the `m x m` factor.
    pub fn singular_values(&self) -> Vec<f64> {
        if self.is_empty() {
            return Vec::new();
        }
        let mut s: Vec<f64> = self.r_upper().singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// `σ_m / sqrt(Σ σ_j²)`; 1 for a single snapshot.
    pub fn spectral_ratio(&self) -> f64 {
        let s = self.singular_values();
        let Some(last) = s.last() else { return 1.0 };
        let energy = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        if energy > 0.0 {
            last / energy
        } else {
            1.0
        }
    }

    /// `U c`; a shorter `c` uses the leading (nested) basis vectors.
    pub fn lift(&self, c: &[f64]) -> Result<Vec<f64>> {
        if c.len() > self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: c.len(),
            });
        }
        let mut out = vec![0.0; self.len];
        for (q, ci) in self.u.iter().zip(c) {
            axpy(*ci, q, &mut out);
        }
        Ok(out)
    }

    /// Coordinates in the snapshot basis: solves `R x = c` with the leading
    /// `c.len()` block of `R`.
    pub fn snapshot_coordinates(&self, c: &[f64]) -> Result<Vec<f64>> {
        let m = c.len();
        if m > self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: m,
            });
        }
        let mut x = c.to_vec();
        for i in (0..m).rev() {
            let d = self.r[i][i];
            if d == 0.0 {
                return Err(Error::SingularMatrix);
            }
            x[i] /= d;
            let xi = x[i];
            for (k, xk) in x.iter_mut().enumerate().take(i) {
                *xk -= self.r[i][k] * xi;
            }
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    #[test]
    fn two_unit_columns() {
        let mut b = SnapshotBasis::new(3);
        b.append(e(3, 0), vec![0.0]).unwrap();
        b.append(vec![1.0, 1.0, 0.0], vec![1.0]).unwrap();
        assert_eq!(b.u()[0], e(3, 0));
        assert!((b.u()[1][1] - 1.0).abs() < 1e-15);
        let r = b.r_upper();
        assert_eq!(r, DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]));
    }

    #[test]
    fn dependent_column_rejected() {
        let mut b = SnapshotBasis::new(3);
        b.append(vec![1.0, 2.0, 0.0], vec![0.0]).unwrap();
        b.append(e(3, 2), vec![1.0]).unwrap();
        let err = b.append(vec![2.0, 4.0, 3.0], vec![2.0]).unwrap_err();
        assert!(matches!(err, Error::NearDependence { .. }));
        assert_eq!(b.dim(), 2);
        assert!(matches!(
            b.append(vec![0.0; 3], vec![3.0]),
            Err(Error::NearDependence { .. })
        ));
    }

    #[test]
    fn spectral_ratio_of_diagonal_factor() {
        let mut b = SnapshotBasis::new(2);
        assert_eq!(b.spectral_ratio(), 1.0);
        b.append(vec![4.0, 0.0], vec![0.0]).unwrap();
        assert_eq!(b.spectral_ratio(), 1.0);
        b.append(vec![0.0, 3.0], vec![1.0]).unwrap();
        assert!((b.spectral_ratio() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn snapshot_coordinates_invert_r() {
        let mut b = SnapshotBasis::new(3);
        b.append(vec![1.0, 0.0, 0.0], vec![0.0]).unwrap();
        b.append(vec![1.0, 2.0, 0.0], vec![1.0]).unwrap();
        b.append(vec![3.0, 1.0, 5.0], vec![2.0]).unwrap();
        let x = b.snapshot_coordinates(&b.r_columns()[2].clone()).unwrap();
        assert!((x[2] - 1.0).abs() < 1e-14 && x[0].abs() < 1e-14 && x[1].abs() < 1e-14);
    }
}
