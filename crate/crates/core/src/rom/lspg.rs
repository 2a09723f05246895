//! Least-squares Petrov-Galerkin projection: `c = argmin ‖G (A(μ) U c − b(μ))‖₂`.
//!
//! Offline, the weighted blocks `Ā^q = G term_q U` and `b̄^q = G b^q` are
//! concatenated into `B` and factored once by pivoted QR, `B P = Q R`. Since
//! `Qᵀ B = R Pᵀ`, every projected block is a column slice of `R Pᵀ` and the
//! online stage only touches `s x Q_B` data.
//!
//! While a greedy loop grows the basis, [`LspgBuilder::build_incremental`] gives the
//! same artifacts from a Gram-Schmidt range of the operator blocks that is extended
//! rather than refactored at every step.

use super::AffineCoefficients;
use crate::dg::FomSystem;
use crate::error::{Error, Result};
use crate::linalg::dense::condition_number;
use crate::linalg::pivoted_qr::{PivotedQr, RANK_TOL};
use crate::linalg::small::{axpy, dot, norm2};
use crate::linalg::{IncrementalRange, SnapshotBasis};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LspgMode {
    /// Data vectors included in `B`; residuals evaluated through `R Pᵀ`.
    #[default]
    Standard,
    /// `B` holds only the operator blocks; data projected separately.
    Prime,
    /// Normal equations `Y_μᵀ Y_μ c = Y_μᵀ b̃_μ`; for comparison only.
    NormalEquation,
}

impl FromStr for LspgMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(LspgMode::Standard),
            "prime" => Ok(LspgMode::Prime),
            "normal-eq" => Ok(LspgMode::NormalEquation),
            _ => Err(Error::Config(format!(
                "unknown variant '{s}' (expected standard, prime or normal-eq)"
            ))),
        }
    }
}

/// Accumulates the weighted blocks as the basis grows.
#[derive(Debug, Clone)]
pub struct LspgBuilder {
    coefficients: AffineCoefficients,
    /// `a_bar[q][i] = G term_q u_i`.
    a_bar: Vec<Vec<Vec<f64>>>,
    b_bar: Vec<Vec<f64>>,
    rank_tol: f64,
    /// Range of the operator columns in growth order `(i, q)`.
    range: IncrementalRange,
}

impl LspgBuilder {
    pub fn new(sys: &FomSystem) -> Self {
        let coefficients = AffineCoefficients::of(sys);
        let b_bar = sys
            .data
            .terms
            .iter()
            .map(|b| sys.weighting.apply(b))
            .collect();
        Self {
            a_bar: vec![Vec::new(); coefficients.q_a()],
            coefficients,
            b_bar,
            rank_tol: RANK_TOL,
            range: IncrementalRange::new(sys.len(), RANK_TOL),
        }
    }

    /// Overrides the relative rank threshold. Must precede [`extend`](Self::extend).
    pub fn with_rank_tolerance(mut self, tol: f64) -> Self {
        self.rank_tol = tol;
        self.range = IncrementalRange::new(self.range.len(), tol);
        self
    }

    pub fn dim(&self) -> usize {
        self.a_bar.first().map_or(0, |a| a.len())
    }

    pub fn extend(&mut self, sys: &FomSystem, basis: &SnapshotBasis) -> Result<()> {
        if basis.len() != sys.len() {
            return Err(Error::DimensionMismatch {
                expected: sys.len(),
                got: basis.len(),
            });
        }
        let mut t = vec![0.0; sys.len()];
        for i in self.dim()..basis.dim() {
            for (q, cols) in self.a_bar.iter_mut().enumerate() {
                sys.operator.apply_term(q, &basis.u()[i], &mut t)?;
                let col = sys.weighting.apply(&t);
                self.range.push(&col)?;
                cols.push(col);
            }
        }
        Ok(())
    }

    pub fn weighted_blocks(&self) -> &[Vec<Vec<f64>>] {
        &self.a_bar
    }

    pub fn weighted_data(&self) -> &[Vec<f64>] {
        &self.b_bar
    }

    /// Columns of `B` in the layout `[Ā¹ … Ā^{Q_A}, b̄¹ … b̄^{Q_b}]` (data omitted
    /// in prime mode).
    pub fn concatenation(&self, mode: LspgMode) -> Vec<Vec<f64>> {
        let mut cols: Vec<Vec<f64>> = self.a_bar.iter().flatten().cloned().collect();
        if mode != LspgMode::Prime {
            cols.extend(self.b_bar.iter().cloned());
        }
        cols
    }

    pub fn factor(&self, mode: LspgMode) -> Result<PivotedQr> {
        PivotedQr::with_tolerance(self.concatenation(mode), self.rank_tol)
    }

    pub fn build(&self, mode: LspgMode) -> Result<LspgRom> {
        let m = self.dim();
        let qa = self.coefficients.q_a();
        let qr = self.factor(mode)?;
        let s = qr.rank();
        if s < m {
            return Err(Error::RankDeficient { rank: s, m });
        }
        let g_res = qr.r_unpermuted();
        let b_tilde: Vec<DVector<f64>> = match mode {
            LspgMode::Prime => self
                .b_bar
                .iter()
                .map(|b| qr.apply_qt(b).map(DVector::from_vec))
                .collect::<Result<_>>()?,
            _ => (0..self.b_bar.len())
                .map(|q| g_res.column(qa * m + q).into_owned())
                .collect(),
        };
        let qb = self.b_bar.len();
        let data_gram = DMatrix::from_fn(qb, qb, |p, q| dot(&self.b_bar[p], &self.b_bar[q]));
        Ok(LspgRom {
            coefficients: self.coefficients.clone(),
            mode,
            m,
            y: (0..qa)
                .map(|q| g_res.columns(q * m, m).into_owned())
                .collect(),
            b_tilde,
            g_res,
            data_gram,
        })
    }

    /// Artifacts from the incrementally grown range instead of a pivoted QR.
    pub fn build_incremental(&self, mode: LspgMode) -> Result<LspgRom> {
        let m = self.dim();
        let qa = self.coefficients.q_a();
        let s_op = self.range.rank();
        if s_op < m {
            return Err(Error::RankDeficient { rank: s_op, m });
        }
        // data directions outside the operator range
        let mut extra: Vec<Vec<f64>> = Vec::new();
        let mut data_coords = Vec::with_capacity(self.b_bar.len());
        let data_scale = self.b_bar.iter().map(|b| norm2(b)).fold(0.0, f64::max);
        for b in &self.b_bar {
            let (mut c, mut rest) = self.range.split(b);
            if mode == LspgMode::Prime {
                data_coords.push(c);
                continue;
            }
            let mut ce = vec![0.0; extra.len()];
            for _pass in 0..2 {
                for (e, x) in extra.iter().zip(ce.iter_mut()) {
                    let p = dot(e, &rest);
                    axpy(-p, e, &mut rest);
                    *x += p;
                }
            }
            let r = norm2(&rest);
            if r > self.rank_tol * data_scale.max(norm2(b)) {
                extra.push(rest.into_iter().map(|x| x / r).collect());
                ce.push(r);
            }
            c.extend(ce);
            data_coords.push(c);
        }
        let s = s_op + extra.len();
        let y: Vec<DMatrix<f64>> = (0..qa)
            .map(|q| {
                let mut yq = DMatrix::zeros(s, m);
                for i in 0..m {
                    for (k, v) in self.range.coordinates(i * qa + q).into_iter().enumerate() {
                        yq[(k, i)] = v;
                    }
                }
                yq
            })
            .collect();
        let b_tilde: Vec<DVector<f64>> = data_coords
            .into_iter()
            .map(|mut c| {
                c.resize(s, 0.0);
                DVector::from_vec(c)
            })
            .collect();
        let qb = self.b_bar.len();
        let data_cols = if mode == LspgMode::Prime { 0 } else { qb };
        let mut g_res = DMatrix::zeros(s, qa * m + data_cols);
        for (q, yq) in y.iter().enumerate() {
            g_res.columns_mut(q * m, m).copy_from(yq);
        }
        for p in 0..data_cols {
            g_res.set_column(qa * m + p, &b_tilde[p]);
        }
        let data_gram = DMatrix::from_fn(qb, qb, |p, q| dot(&self.b_bar[p], &self.b_bar[q]));
        Ok(LspgRom {
            coefficients: self.coefficients.clone(),
            mode,
            m,
            y,
            b_tilde,
            g_res,
            data_gram,
        })
    }
}

/// Online artifacts; every array is `O(s · Q_B)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LspgRom {
    pub coefficients: AffineCoefficients,
    pub mode: LspgMode,
    pub m: usize,
    /// `Y^q = Qᵀ Ā^q`, `s x m`.
    pub y: Vec<DMatrix<f64>>,
    /// `b̃^q = Qᵀ b̄^q`.
    pub b_tilde: Vec<DVector<f64>>,
    /// `R Pᵀ`, `s x Q_B`.
    pub g_res: DMatrix<f64>,
    /// `(b̄^p)ᵀ b̄^q`.
    pub data_gram: DMatrix<f64>,
}

/// Reduced solution together with `d_μ = Q̃_μᵀ b̃_μ`.
#[derive(Debug, Clone)]
pub struct LspgSolution {
    pub c: DVector<f64>,
    pub d: DVector<f64>,
}

impl LspgRom {
    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn rank(&self) -> usize {
        self.g_res.nrows()
    }

    /// Artifacts for the leading `m` basis vectors. The factor still spans the
    /// full concatenation, which contains every truncated block.
    pub fn truncated(&self, m: usize) -> Self {
        let m = m.min(self.m);
        let qa = self.y.len();
        let data_cols = self.g_res.ncols() - qa * self.m;
        let mut g_res = DMatrix::zeros(self.rank(), qa * m + data_cols);
        for q in 0..qa {
            g_res
                .columns_mut(q * m, m)
                .copy_from(&self.g_res.columns(q * self.m, m));
        }
        g_res
            .columns_mut(qa * m, data_cols)
            .copy_from(&self.g_res.columns(qa * self.m, data_cols));
        Self {
            coefficients: self.coefficients.clone(),
            mode: self.mode,
            m,
            y: self
                .y
                .iter()
                .map(|y| y.columns(0, m).into_owned())
                .collect(),
            b_tilde: self.b_tilde.clone(),
            g_res,
            data_gram: self.data_gram.clone(),
        }
    }

    /// `Y_μ` and `b̃_μ`.
    pub fn system(&self, mu: &[f64]) -> (DMatrix<f64>, DVector<f64>) {
        let s = self.rank();
        let mut y = DMatrix::zeros(s, self.m);
        for (th, yq) in self.coefficients.theta_a(mu).iter().zip(&self.y) {
            if *th != 0.0 {
                y += yq * *th;
            }
        }
        let mut b = DVector::zeros(s);
        for (th, bq) in self.coefficients.theta_b(mu).iter().zip(&self.b_tilde) {
            if *th != 0.0 {
                b.axpy(*th, bq, 1.0);
            }
        }
        (y, b)
    }

    pub fn solve(&self, mu: &[f64]) -> Result<DVector<f64>> {
        Ok(self.solve_full(mu)?.c)
    }

    pub fn solve_full(&self, mu: &[f64]) -> Result<LspgSolution> {
        let (y, b) = self.system(mu);
        let m = self.m;
        match self.mode {
            LspgMode::NormalEquation => {
                let yt = y.transpose();
                let c = (&yt * &y)
                    .lu()
                    .solve(&(&yt * &b))
                    .ok_or(Error::SingularMatrix)?;
                let d = DVector::zeros(m);
                Ok(LspgSolution { c, d })
            }
            _ => {
                let qr = y.qr();
                let r = qr.r();
                let rmax = (0..m).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
                if let Some(k) = (0..m).find(|&i| !(r[(i, i)].abs() > RANK_TOL * rmax)) {
                    return Err(Error::RankDeficient { rank: k, m });
                }
                let d = qr.q().tr_mul(&b);
                let c = r.solve_upper_triangular(&d).ok_or(Error::SingularMatrix)?;
                Ok(LspgSolution { c, d })
            }
        }
    }

    /// Condition number of the matrix factored online (`Y_μ`, or `Y_μᵀ Y_μ` for
    /// the normal equations).
    pub fn condition(&self, mu: &[f64]) -> f64 {
        let (y, _) = self.system(mu);
        match self.mode {
            LspgMode::NormalEquation => condition_number(&(y.transpose() * &y)),
            _ => condition_number(&y),
        }
    }

    /// `‖G (A(μ) U c − b(μ))‖₂` for any `c`, via `R Pᵀ [θ^A ⊗ c; −θ^b]`.
    pub fn residual_norm(&self, mu: &[f64], c: &[f64]) -> Result<f64> {
        if self.mode == LspgMode::Prime {
            return Err(Error::Config(
                "residual evaluation needs the data vectors in the factored block".into(),
            ));
        }
        if c.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: c.len(),
            });
        }
        let ta = self.coefficients.theta_a(mu);
        let tb = self.coefficients.theta_b(mu);
        let mut z = Vec::with_capacity(self.g_res.ncols());
        for t in &ta {
            z.extend(c.iter().map(|ci| t * ci));
        }
        z.extend(tb.iter().map(|t| -t));
        Ok((&self.g_res * DVector::from_vec(z)).norm())
    }

    /// Residual of a reduced solution by the mode's own evaluator: the factored form
    /// where the data vectors were factored with the operator, Pythagoras otherwise.
    pub fn residual_of(&self, mu: &[f64], sol: &LspgSolution) -> Result<f64> {
        match self.mode {
            LspgMode::Prime => Ok(self.residual_norm_pythagorean(mu, &sol.d).0),
            _ => self.residual_norm(mu, sol.c.as_slice()),
        }
    }

    /// `sqrt(‖b̄_μ‖² − ‖d_μ‖²)` for the minimizer. A negative radicand is pure
    /// cancellation; its magnitude is used and the flag reports it.
    pub fn residual_norm_pythagorean(&self, mu: &[f64], d: &DVector<f64>) -> (f64, bool) {
        let tb = DVector::from_vec(self.coefficients.theta_b(mu));
        let total = tb.dot(&(&self.data_gram * &tb));
        let radicand = total - d.norm_squared();
        (radicand.abs().sqrt(), radicand < 0.0)
    }
}
