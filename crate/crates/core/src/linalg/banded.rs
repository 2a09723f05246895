//! Cholesky factorization of symmetric positive definite band matrices.

use crate::error::{Error, Result};

/// Lower band storage: entry `(i, i - d)` for `0 <= d <= bandwidth` at
/// `i * (bandwidth + 1) + d`.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        Self {
            n,
            bw: bandwidth,
            data: vec![0.0; n * (bandwidth + 1)],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Adds `v` to the symmetric pair `(i, k)`/`(k, i)`; only the lower entry is stored.
    pub fn add(&mut self, i: usize, k: usize, v: f64) {
        let (r, c) = if i >= k { (i, k) } else { (k, i) };
        let d = r - c;
        assert!(d <= self.bw, "entry outside the band");
        self.data[r * (self.bw + 1) + d] += v;
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        let (r, c) = if i >= k { (i, k) } else { (k, i) };
        let d = r - c;
        if d > self.bw {
            0.0
        } else {
            self.data[r * (self.bw + 1) + d]
        }
    }

    /// In-place Cholesky factorization `A = L L^T`.
    pub fn cholesky(mut self) -> Result<BandCholesky> {
        let w = self.bw + 1;
        for j in 0..self.n {
            let lo = j.saturating_sub(self.bw);
            let mut s = self.data[j * w];
            for k in lo..j {
                let l = self.data[j * w + (j - k)];
                s -= l * l;
            }
            if !(s > 0.0) {
                return Err(Error::SingularMatrix);
            }
            let djj = s.sqrt();
            self.data[j * w] = djj;
            for i in j + 1..(j + w).min(self.n) {
                let lo_i = i.saturating_sub(self.bw);
                let mut s = self.data[i * w + (i - j)];
                for k in lo_i.max(lo)..j {
                    s -= self.data[i * w + (i - k)] * self.data[j * w + (j - k)];
                }
                self.data[i * w + (i - j)] = s / djj;
            }
        }
        Ok(BandCholesky { factor: self })
    }
}

#[derive(Debug, Clone)]
pub struct BandCholesky {
    factor: BandMatrix,
}

impl BandCholesky {
    pub fn len(&self) -> usize {
        self.factor.n
    }

    pub fn is_empty(&self) -> bool {
        self.factor.n == 0
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, x: &mut [f64]) {
        let n = self.factor.n;
        let bw = self.factor.bw;
        let w = bw + 1;
        let l = &self.factor.data;
        for i in 0..n {
            let mut s = x[i];
            for k in i.saturating_sub(bw)..i {
                s -= l[i * w + (i - k)] * x[k];
            }
            x[i] = s / l[i * w];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for r in i + 1..(i + w).min(n) {
                s -= l[r * w + (r - i)] * x[r];
            }
            x[i] = s / l[i * w];
        }
    }
}
