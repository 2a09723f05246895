//! Galerkin projection: `Uᵀ A(μ) U c = Uᵀ b(μ)` with the reduced affine terms
//! precomputed and grown one basis vector at a time.

use super::AffineCoefficients;
use crate::dg::FomSystem;
use crate::error::{Error, Result};
use crate::linalg::dense::condition_number;
use crate::linalg::small::dot;
use crate::linalg::SnapshotBasis;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Online solves are refused above this 1-norm condition estimate.
pub const MAX_CONDITION: f64 = 1e14;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GalerkinRom {
    pub coefficients: AffineCoefficients,
    /// `Â^q = Uᵀ term_q U`.
    pub a_hat: Vec<DMatrix<f64>>,
    /// `b̂^q = Uᵀ b^q`.
    pub b_hat: Vec<DVector<f64>>,
}

impl GalerkinRom {
    pub fn empty(sys: &FomSystem) -> Self {
        let coefficients = AffineCoefficients::of(sys);
        Self {
            a_hat: vec![DMatrix::zeros(0, 0); coefficients.q_a()],
            b_hat: vec![DVector::zeros(0); coefficients.q_b()],
            coefficients,
        }
    }

    pub fn offline(sys: &FomSystem, basis: &SnapshotBasis) -> Result<Self> {
        let mut rom = Self::empty(sys);
        rom.extend(sys, basis)?;
        Ok(rom)
    }

    pub fn dim(&self) -> usize {
        self.a_hat.first().map_or(0, |a| a.nrows())
    }

    /// Adds the rows and columns for basis vectors not yet projected.
    pub fn extend(&mut self, sys: &FomSystem, basis: &SnapshotBasis) -> Result<()> {
        let u = basis.u();
        if basis.len() != sys.len() {
            return Err(Error::DimensionMismatch {
                expected: sys.len(),
                got: basis.len(),
            });
        }
        let n = sys.len();
        let mut t = vec![0.0; n];
        let mut tt = vec![0.0; n];
        for i in self.dim()..u.len() {
            for (q, a) in self.a_hat.iter_mut().enumerate() {
                sys.operator.apply_term(q, &u[i], &mut t)?;
                sys.operator.apply_term_transpose(q, &u[i], &mut tt)?;
                let grown = std::mem::replace(a, DMatrix::zeros(0, 0)).resize(i + 1, i + 1, 0.0);
                *a = grown;
                for k in 0..=i {
                    a[(k, i)] = dot(&u[k], &t);
                }
                for k in 0..i {
                    a[(i, k)] = dot(&tt, &u[k]);
                }
            }
            for (q, b) in self.b_hat.iter_mut().enumerate() {
                let grown = std::mem::replace(b, DVector::zeros(0)).resize_vertically(i + 1, 0.0);
                *b = grown;
                b[i] = dot(&u[i], &sys.data.terms[q]);
            }
        }
        Ok(())
    }

    /// Reduced matrix and right-hand side at `mu`.
    pub fn system(&self, mu: &[f64]) -> (DMatrix<f64>, DVector<f64>) {
        let m = self.dim();
        let mut a = DMatrix::zeros(m, m);
        for (th, aq) in self.coefficients.theta_a(mu).iter().zip(&self.a_hat) {
            if *th != 0.0 {
                a += aq * *th;
            }
        }
        let mut b = DVector::zeros(m);
        for (th, bq) in self.coefficients.theta_b(mu).iter().zip(&self.b_hat) {
            if *th != 0.0 {
                b.axpy(*th, bq, 1.0);
            }
        }
        (a, b)
    }

    /// Reduced coefficients by LU with partial pivoting.
    pub fn solve(&self, mu: &[f64]) -> Result<DVector<f64>> {
        let (a, b) = self.system(mu);
        let norm1 = one_norm(&a);
        let lu = a.lu();
        let x = lu.solve(&b).ok_or(Error::SingularMatrix)?;
        let inv = lu.try_inverse().ok_or(Error::SingularMatrix)?;
        let estimate = norm1 * one_norm(&inv);
        if !(estimate <= MAX_CONDITION) {
            return Err(Error::IllConditioned(estimate));
        }
        Ok(x)
    }

    pub fn condition(&self, mu: &[f64]) -> f64 {
        condition_number(&self.system(mu).0)
    }

    /// Copy restricted to the first `m` basis vectors.
    pub fn truncated(&self, m: usize) -> Self {
        let m = m.min(self.dim());
        Self {
            coefficients: self.coefficients.clone(),
            a_hat: self
                .a_hat
                .iter()
                .map(|a| a.view((0, 0), (m, m)).into_owned())
                .collect(),
            b_hat: self
                .b_hat
                .iter()
                .map(|b| b.rows(0, m).into_owned())
                .collect(),
        }
    }
}

fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
