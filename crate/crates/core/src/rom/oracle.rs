//! Dense reference computations on small systems. These form `N`-sized matrices and
//! exist to check the offline/online algorithms.

use super::lspg::LspgBuilder;
use super::LspgMode;
use crate::dg::FomSystem;
use crate::error::{Error, Result};
use crate::linalg::dense::{condition_number, least_squares};
use crate::linalg::SnapshotBasis;
use nalgebra::{DMatrix, DVector};

/// `(G A(μ) U, G b(μ))` as dense arrays.
pub fn weighted_projection(
    sys: &FomSystem,
    basis: &SnapshotBasis,
    mu: &[f64],
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = sys.len();
    let mut ga = DMatrix::zeros(n, basis.dim());
    for (j, u) in basis.u().iter().enumerate() {
        let col = sys.weighting.apply(&sys.apply(mu, u)?);
        ga.set_column(j, &DVector::from_vec(col));
    }
    let gb = DVector::from_vec(sys.weighting.apply(&sys.rhs(mu)));
    Ok((ga, gb))
}

/// `argmin ‖G (A(μ) U c − b(μ))‖₂` by Householder QR of `G A(μ) U`.
pub fn weighted_least_squares(
    sys: &FomSystem,
    basis: &SnapshotBasis,
    mu: &[f64],
) -> Result<DVector<f64>> {
    let (ga, gb) = weighted_projection(sys, basis, mu)?;
    least_squares(&ga, &gb)
}

/// `Uᵀ A(μ) U` and `Uᵀ b(μ)` formed directly.
pub fn galerkin_system(
    sys: &FomSystem,
    basis: &SnapshotBasis,
    mu: &[f64],
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let m = basis.dim();
    let u = basis.u();
    let au: Vec<Vec<f64>> = u.iter().map(|c| sys.apply(mu, c)).collect::<Result<_>>()?;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let a = DMatrix::from_fn(m, m, |i, j| dot(&u[i], &au[j]));
    let b_full = sys.rhs(mu);
    let b = DVector::from_fn(m, |i, _| dot(&u[i], &b_full));
    Ok((a, b))
}

/// Normal equations with the test space `W = M_h A(μ) U`, where `M_h = GᵀG`:
/// `(G A U)ᵀ (G A U) c = (G A U)ᵀ G b`. Returns the coefficients and the condition
/// number of the normal matrix.
pub fn normal_equation_solve(
    sys: &FomSystem,
    basis: &SnapshotBasis,
    mu: &[f64],
) -> Result<(DVector<f64>, f64)> {
    let (ga, gb) = weighted_projection(sys, basis, mu)?;
    let normal = ga.transpose() * &ga;
    let cond = condition_number(&normal);
    let c = normal
        .lu()
        .solve(&(ga.transpose() * gb))
        .ok_or(Error::SingularMatrix)?;
    Ok((c, cond))
}

/// Condition number of `G A(μ) U`, the matrix behind the QR path.
pub fn weighted_condition(sys: &FomSystem, basis: &SnapshotBasis, mu: &[f64]) -> Result<f64> {
    Ok(condition_number(&weighted_projection(sys, basis, mu)?.0))
}

/// Residual norm split into components inside and orthogonal to the range of the
/// operator blocks:
/// `‖R Pᵀ (θ^A ⊗ c) − Qᵀ B̂ θ^b‖² + ‖(I − Q Qᵀ) B̂ θ^b‖²`.
/// The second term is `N`-sized, which is why this is a comparison routine only.
pub fn residual_norm_split(builder: &LspgBuilder, mu: &[f64], c: &[f64]) -> Result<f64> {
    let qr = builder.factor(LspgMode::Prime)?;
    let rom = builder.build(LspgMode::Prime)?;
    let ta = rom.coefficients.theta_a(mu);
    let tb = rom.coefficients.theta_b(mu);
    let rp = qr.r_unpermuted();
    let mut z = Vec::with_capacity(rp.ncols());
    for t in &ta {
        z.extend(c.iter().map(|ci| t * ci));
    }
    let mut inside = &rp * DVector::from_vec(z);
    for (t, bq) in tb.iter().zip(&rom.b_tilde) {
        inside.axpy(-t, bq, 1.0);
    }
    let data = builder.weighted_data();
    let mut b_mu = vec![0.0; qr.rows()];
    for (t, bq) in tb.iter().zip(data) {
        for (x, y) in b_mu.iter_mut().zip(bq) {
            *x += t * y;
        }
    }
    let back = qr.apply_q(&qr.apply_qt(&b_mu)?)?;
    let outside: f64 = b_mu.iter().zip(&back).map(|(a, b)| (a - b).powi(2)).sum();
    Ok((inside.norm_squared() + outside).sqrt())
}
