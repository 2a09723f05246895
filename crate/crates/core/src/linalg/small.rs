//! Tiny row-major dense kernels for element-local blocks.

/// In-place LU with partial pivoting of an `n x n` row-major matrix.
/// Returns `false` if a pivot is exactly zero or not finite.
pub fn lu_factor(a: &mut [f64], n: usize, piv: &mut [usize]) -> bool {
    for k in 0..n {
        let mut p = k;
        let mut best = a[k * n + k].abs();
        for i in k + 1..n {
            let v = a[i * n + k].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        piv[k] = p;
        if !(best > 0.0) || !best.is_finite() {
            return false;
        }
        if p != k {
            for c in 0..n {
                a.swap(k * n + c, p * n + c);
            }
        }
        let d = a[k * n + k];
        for i in k + 1..n {
            let f = a[i * n + k] / d;
            a[i * n + k] = f;
            for c in k + 1..n {
                a[i * n + c] -= f * a[k * n + c];
            }
        }
    }
    true
}

/// Solves with factors from [`lu_factor`], overwriting `x`.
pub fn lu_solve(lu: &[f64], n: usize, piv: &[usize], x: &mut [f64]) {
    for k in 0..n {
        x.swap(k, piv[k]);
    }
    for i in 0..n {
        let mut s = x[i];
        for c in 0..i {
            s -= lu[i * n + c] * x[c];
        }
        x[i] = s;
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for c in i + 1..n {
            s -= lu[i * n + c] * x[c];
        }
        x[i] = s / lu[i * n + i];
    }
}

/// `y += alpha * A x` for row-major `A` of shape `rows x cols`.
#[inline]
pub fn gemv_add(a: &[f64], rows: usize, cols: usize, x: &[f64], alpha: f64, y: &mut [f64]) {
    for i in 0..rows {
        let row = &a[i * cols..(i + 1) * cols];
        let mut s = 0.0;
        for c in 0..cols {
            s += row[c] * x[c];
        }
        y[i] += alpha * s;
    }
}

/// `y += alpha * A^T x` for row-major `A` of shape `rows x cols`.
#[inline]
pub fn gemv_t_add(a: &[f64], rows: usize, cols: usize, x: &[f64], alpha: f64, y: &mut [f64]) {
    for i in 0..rows {
        let xi = alpha * x[i];
        if xi == 0.0 {
            continue;
        }
        let row = &a[i * cols..(i + 1) * cols];
        for c in 0..cols {
            y[c] += row[c] * xi;
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_roundtrip() {
        let a = [0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 4.0];
        let mut lu = a;
        let mut piv = [0; 3];
        assert!(lu_factor(&mut lu, 3, &mut piv));
        let x_true = [1.0, -2.0, 0.5];
        let mut b = [0.0; 3];
        gemv_add(&a, 3, 3, &x_true, 1.0, &mut b);
        lu_solve(&lu, 3, &piv, &mut b);
        for i in 0..3 {
            assert!((b[i] - x_true[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_detected() {
        let mut a = [1.0, 2.0, 2.0, 4.0];
        let mut piv = [0; 2];
        assert!(!lu_factor(&mut a, 2, &mut piv));
    }
}
