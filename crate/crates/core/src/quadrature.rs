//! Angular quadratures and the Gauss-Legendre rule they are built from.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1], ascending, weights summing to 2.
///
/// Nodes are found by Newton iteration on P_n started from the Chebyshev-like
/// guess; symmetric pairs are mirrored so the rule is exactly antisymmetric.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // i counts down from the largest node
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Legendre polynomial P_n(x) and its derivative.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    // derivative from the standard identity, with the endpoint limit handled explicitly
    let nf = n as f64;
    let d = if (1.0 - x * x).abs() < 1e-300 {
        let s = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * nf * (nf + 1.0) / 2.0
    } else {
        nf * (p0 - x * p1) / (1.0 - x * x)
    };
    (p1, d)
}

/// Discrete set of directions with weights normalized to sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularQuadrature {
    dim_v: usize,
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl AngularQuadrature {
    /// Angular dimension: 1 for the slab cosine, 3 for the unit sphere.
    pub fn dim_v(&self) -> usize {
        self.dim_v
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn node(&self, j: usize) -> [f64; 3] {
        self.nodes[j]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, j: usize) -> f64 {
        self.weights[j]
    }
}

/// Gauss-Legendre rule on [-1, 1] for the slab direction cosine, weights halved.
pub fn gauss_legendre_slab(n_points: usize) -> Result<AngularQuadrature> {
    if n_points == 0 {
        return Err(Error::InvalidQuadrature(
            "slab rule needs at least one point".into(),
        ));
    }
    let (x, w) = gauss_legendre(n_points);
    Ok(AngularQuadrature {
        dim_v: 1,
        nodes: x.iter().map(|&v| [v, 0.0, 0.0]).collect(),
        weights: w.iter().map(|&wi| 0.5 * wi).collect(),
    })
}

/// Product rule on the unit sphere: equispaced azimuth times Gauss-Legendre in the
/// polar cosine. Direction j = l + k * n_xi, azimuth index outer.
pub fn chebyshev_legendre_sphere(n_theta: usize, n_xi: usize) -> Result<AngularQuadrature> {
    if n_theta < 2 || !n_theta.is_multiple_of(2) {
        return Err(Error::InvalidQuadrature(format!(
            "azimuthal count must be even and at least 2, got {n_theta}"
        )));
    }
    if n_xi == 0 {
        return Err(Error::InvalidQuadrature(
            "polar count must be positive".into(),
        ));
    }
    let (xi, wxi) = gauss_legendre(n_xi);
    let w_theta = 1.0 / (2.0 * n_theta as f64);
    let mut nodes = Vec::with_capacity(n_theta * n_xi);
    let mut weights = Vec::with_capacity(n_theta * n_xi);
    for k in 1..=n_theta {
        let theta = (2.0 * k as f64 - 1.0) * PI / n_theta as f64;
        let (s, c) = theta.sin_cos();
        for l in 0..n_xi {
            let r = (1.0 - xi[l] * xi[l]).sqrt();
            nodes.push([c * r, s * r, xi[l]]);
            weights.push(w_theta * wxi[l]);
        }
    }
    Ok(AngularQuadrature {
        dim_v: 3,
        nodes,
        weights,
    })
}
