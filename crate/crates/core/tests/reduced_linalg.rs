//! Snapshot QR, spectral ratio, pivoted QR and the dense least-squares oracle against
//! independent dense factorizations.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rte_rbm::linalg::dense::{condition_number, least_squares};
use rte_rbm::linalg::{PivotedQr, SnapshotBasis};

fn random_columns(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

fn to_matrix(cols: &[Vec<f64>]) -> DMatrix<f64> {
    let n = cols.first().map_or(0, |c| c.len());
    DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i])
}

fn basis_of(cols: &[Vec<f64>]) -> SnapshotBasis {
    let mut b = SnapshotBasis::new(cols[0].len());
    for (j, c) in cols.iter().enumerate() {
        b.append(c.clone(), vec![j as f64]).unwrap();
    }
    b
}

fn check_basis_invariants(b: &SnapshotBasis) {
    let u = to_matrix(b.u());
    let f = to_matrix(b.snapshots());
    let m = b.dim();
    let gram = u.transpose() * &u - DMatrix::identity(m, m);
    assert!(gram.amax() <= 1e-12, "UᵀU - I = {:e}", gram.amax());
    let rec = &f - &u * b.r_upper();
    assert!(rec.amax() <= 1e-12 * f.amax(), "F - UR = {:e}", rec.amax());
}

/// R factors agree after fixing the sign of each row.
fn assert_same_r(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) {
    for i in 0..a.nrows() {
        let s = if a[(i, i)] * b[(i, i)] < 0.0 {
            -1.0
        } else {
            1.0
        };
        for j in 0..a.ncols() {
            let d = (a[(i, j)] - s * b[(i, j)]).abs();
            assert!(d <= tol, "R[{i},{j}] differs by {d:e}");
        }
    }
}

#[test]
fn cgsr_matches_householder_on_fifty_columns() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cols = random_columns(&mut rng, 500, 50);
    let b = basis_of(&cols);
    check_basis_invariants(&b);
    let r_ref = to_matrix(&cols).qr().r();
    assert_same_r(&b.r_upper(), &r_ref, 1e-10);
}

#[test]
fn appending_keeps_leading_factors() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cols = random_columns(&mut rng, 80, 8);
    let small = basis_of(&cols[..5]);
    let big = basis_of(&cols);
    for j in 0..5 {
        assert_eq!(small.u()[j], big.u()[j]);
        assert_eq!(small.r_columns()[j], big.r_columns()[j]);
    }
}

#[test]
fn spectral_ratio_matches_full_svd() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut cols = random_columns(&mut rng, 300, 6);
    // spread the scales so the ratio is far from trivial
    for (j, c) in cols.iter_mut().enumerate() {
        c.iter_mut().for_each(|x| *x *= 10f64.powi(-(j as i32)));
    }
    let b = basis_of(&cols);
    let s = to_matrix(&cols).singular_values();
    let mut s: Vec<f64> = s.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    let want = s[5] / s.iter().map(|x| x * x).sum::<f64>().sqrt();
    let got = b.spectral_ratio();
    assert!(
        (got - want).abs() <= 1e-12 * want.max(1e-300) + 1e-300,
        "{got:e} vs {want:e}"
    );
    let sv = b.singular_values();
    for (a, c) in sv.iter().zip(&s) {
        assert!((a - c).abs() <= 1e-12 * s[0]);
    }
}

fn check_pivoted(cols: &[Vec<f64>], qr: &PivotedQr) {
    let b = to_matrix(cols);
    let q = to_matrix(&qr.q_columns());
    let s = qr.rank();
    let orth = q.transpose() * &q - DMatrix::identity(s, s);
    assert!(orth.amax() <= 1e-12, "QᵀQ - I = {:e}", orth.amax());
    let mut bp = DMatrix::zeros(b.nrows(), b.ncols());
    for (k, &j) in qr.perm().iter().enumerate() {
        bp.set_column(k, &b.column(j));
    }
    let rec = &q * qr.r() - bp;
    assert!(rec.amax() <= 1e-11 * b.amax(), "QR - BP = {:e}", rec.amax());
    for k in 1..s {
        let (prev, cur) = (qr.r()[(k - 1, k - 1)].abs(), qr.r()[(k, k)].abs());
        assert!(
            cur <= prev * (1.0 + 1e-12),
            "|R_kk| increases at {k}: {prev:e} -> {cur:e}"
        );
    }
}

#[test]
fn pivoted_qr_random_tall() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cols = random_columns(&mut rng, 200, 12);
    let qr = PivotedQr::new(cols.clone()).unwrap();
    assert_eq!(qr.rank(), 12);
    check_pivoted(&cols, &qr);
}

#[test]
fn pivoted_qr_detects_rank_of_combinations() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let base = random_columns(&mut rng, 150, 4);
    let mut cols = base.clone();
    for _ in 0..6 {
        let w: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        cols.push(
            (0..150)
                .map(|i| (0..4).map(|k| w[k] * base[k][i]).sum())
                .collect(),
        );
    }
    let qr = PivotedQr::new(cols.clone()).unwrap();
    assert_eq!(qr.rank(), 4);
    // every column lies in the range of the truncated Q
    let q = to_matrix(&qr.q_columns());
    let b = to_matrix(&cols);
    let proj = &q * (q.transpose() * &b);
    assert!((proj - &b).amax() <= 1e-11 * b.amax());
}

#[test]
fn least_squares_matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let a = to_matrix(&random_columns(&mut rng, 60, 5));
    let rhs = DVector::from_fn(60, |_, _| rng.random_range(-1.0..1.0));
    let x = least_squares(&a, &rhs).unwrap();
    let ata = a.transpose() * &a;
    let y = ata.lu().solve(&(a.transpose() * &rhs)).unwrap();
    assert!((&x - &y).amax() <= 1e-8 * y.amax());
    assert!(condition_number(&a) < 1e3);
}

#[test]
fn least_squares_single_column_interpolates() {
    let a = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 2.0]);
    let rhs = DVector::from_vec(vec![-0.5, -1.0, -1.0]);
    let x = least_squares(&a, &rhs).unwrap();
    assert!((x[0] + 0.5).abs() < 1e-15);
    assert!((&a * &x - rhs).norm() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cgsr_equals_batch_householder(seed in any::<u64>(), n in 30usize..500, m in 1usize..30) {
        let m = m.min(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cols = random_columns(&mut rng, n, m);
        let b = basis_of(&cols);
        check_basis_invariants(&b);
        assert_same_r(&b.r_upper(), &to_matrix(&cols).qr().r(), 1e-10);
        let r = b.spectral_ratio();
        prop_assert!(r > 0.0 && r <= 1.0);
    }

    #[test]
    fn pivoted_qr_invariants(seed in any::<u64>(), n in 20usize..200, m in 1usize..16) {
        let m = m.min(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cols = random_columns(&mut rng, n, m);
        let qr = PivotedQr::new(cols.clone()).unwrap();
        check_pivoted(&cols, &qr);
    }
}
