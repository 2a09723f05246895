//! Orthonormal basis of the span of a growing column set, `B = Q T`, built by
//! Gram-Schmidt with one reorthogonalization pass. Columns whose remainder falls
//! below the rank threshold add no direction. `T` is upper trapezoidal in column
//! order, so appending never changes the coordinates of earlier columns.

use super::small::{axpy, dot, norm2};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct IncrementalRange {
    len: usize,
    q: Vec<Vec<f64>>,
    /// `coords[j] = Qᵀ b_j`, with as many entries as directions existed after column `j`.
    coords: Vec<Vec<f64>>,
    max_norm: f64,
    rank_tol: f64,
}

impl IncrementalRange {
    pub fn new(len: usize, rank_tol: f64) -> Self {
        Self {
            len,
            q: Vec::new(),
            coords: Vec::new(),
            max_norm: 0.0,
            rank_tol,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn rank(&self) -> usize {
        self.q.len()
    }

    pub fn columns(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.q
    }

    /// Coordinates of column `j`, padded with zeros to the current rank.
    pub fn coordinates(&self, j: usize) -> Vec<f64> {
        let mut c = self.coords[j].clone();
        c.resize(self.rank(), 0.0);
        c
    }

    /// Appends a column; returns whether it contributed a new direction.
    pub fn push(&mut self, column: &[f64]) -> Result<bool> {
        if column.len() != self.len {
            return Err(Error::DimensionMismatch {
                expected: self.len,
                got: column.len(),
            });
        }
        let scale = norm2(column);
        self.max_norm = self.max_norm.max(scale);
        let (mut coords, rest) = self.split(column);
        let grown = norm2(&rest) > self.rank_tol * self.max_norm;
        if grown {
            let r = norm2(&rest);
            self.q.push(rest.into_iter().map(|x| x / r).collect());
            coords.push(r);
        }
        self.coords.push(coords);
        Ok(grown)
    }

    /// `(Qᵀ v, (I − Q Qᵀ) v)` with reorthogonalization.
    pub fn split(&self, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut rest = v.to_vec();
        let mut coeffs = vec![0.0; self.q.len()];
        for _pass in 0..2 {
            let proj: Vec<f64> = self.q.iter().map(|q| dot(q, &rest)).collect();
            for (q, p) in self.q.iter().zip(&proj) {
                axpy(-p, q, &mut rest);
            }
            for (c, p) in coeffs.iter_mut().zip(&proj) {
                *c += p;
            }
        }
        (coeffs, rest)
    }
}
