//! Small dense helpers on `nalgebra` matrices.

use super::pivoted_qr::RANK_TOL;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// 2-norm condition number from the singular values; infinite when singular.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 1.0;
    }
    let s = a.singular_values();
    let max = s.max();
    let min = s.min();
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// `argmin ‖A x − b‖₂` by Householder QR of `A` (rows ≥ columns, full column rank).
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let (rows, cols) = a.shape();
    if b.len() != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            got: b.len(),
        });
    }
    if rows < cols {
        return Err(Error::RankDeficient {
            rank: rows,
            m: cols,
        });
    }
    let qr = a.clone().qr();
    let r = qr.r();
    let r00 = (0..cols).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if let Some(k) = (0..cols).find(|&i| !(r[(i, i)].abs() > RANK_TOL * r00)) {
        return Err(Error::RankDeficient { rank: k, m: cols });
    }
    let qtb = qr.q().transpose() * b;
    r.solve_upper_triangular(&qtb).ok_or(Error::SingularMatrix)
}
