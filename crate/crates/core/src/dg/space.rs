//! Piecewise polynomial spaces on the Cartesian mesh.

use crate::error::{Error, Result};
use crate::mesh::SpatialMesh;
use crate::quadrature::{gauss_legendre, legendre_with_derivative};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Choice of local basis on each element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum BasisKind {
    /// Tensor Legendre polynomials scaled to be L2-orthonormal on the element.
    #[default]
    OrthonormalLegendre,
    /// Lagrange polynomials at equispaced nodes (endpoints included).
    Nodal,
}

/// Local basis along one axis on an element of width `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisBasis {
    kind: BasisKind,
    degree: usize,
    h: f64,
    trivial: bool,
    /// `mass[k*n + l] = ∫ ψ_k ψ_l`
    pub mass: Vec<f64>,
    /// `stiff[k*n + l] = ∫ ψ_k' ψ_l`
    pub stiff: Vec<f64>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    /// `∫ ψ_k`
    pub integral: Vec<f64>,
}

impl AxisBasis {
    pub fn new(kind: BasisKind, degree: usize, h: f64) -> Self {
        let mut b = Self {
            kind,
            degree,
            h,
            trivial: false,
            mass: vec![],
            stiff: vec![],
            left: vec![],
            right: vec![],
            integral: vec![],
        };
        let n = degree + 1;
        let (xq, wq) = gauss_legendre(degree + 2);
        b.mass = vec![0.0; n * n];
        b.stiff = vec![0.0; n * n];
        b.integral = vec![0.0; n];
        for (&xi, &w) in xq.iter().zip(&wq) {
            let jac = 0.5 * h * w;
            let vals: Vec<(f64, f64)> = (0..n).map(|k| b.eval(k, xi)).collect();
            for k in 0..n {
                b.integral[k] += jac * vals[k].0;
                for l in 0..n {
                    b.mass[k * n + l] += jac * vals[k].0 * vals[l].0;
                    b.stiff[k * n + l] += jac * vals[k].1 * vals[l].0;
                }
            }
        }
        b.left = (0..n).map(|k| b.eval(k, -1.0).0).collect();
        b.right = (0..n).map(|k| b.eval(k, 1.0).0).collect();
        b
    }

    /// Degenerate axis used for the missing second dimension in slab problems.
    pub fn trivial() -> Self {
        Self {
            kind: BasisKind::OrthonormalLegendre,
            degree: 0,
            h: 1.0,
            trivial: true,
            mass: vec![1.0],
            stiff: vec![0.0],
            left: vec![1.0],
            right: vec![1.0],
            integral: vec![1.0],
        }
    }

    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Value and x-derivative of basis function `k` at reference coordinate `xi`.
    pub fn eval(&self, k: usize, xi: f64) -> (f64, f64) {
        if self.trivial {
            return (1.0, 0.0);
        }
        match self.kind {
            BasisKind::OrthonormalLegendre => {
                let s = ((2 * k + 1) as f64 / self.h).sqrt();
                let (p, dp) = legendre_with_derivative(k, xi);
                (s * p, s * dp * 2.0 / self.h)
            }
            BasisKind::Nodal => {
                let n = self.degree + 1;
                if n == 1 {
                    return (1.0, 0.0);
                }
                let node = |i: usize| -1.0 + 2.0 * i as f64 / self.degree as f64;
                let xk = node(k);
                let mut val = 1.0;
                let mut der = 0.0;
                for i in (0..n).filter(|&i| i != k) {
                    let mut term = 1.0 / (xk - node(i));
                    for m in (0..n).filter(|&m| m != k && m != i) {
                        term *= (xi - node(m)) / (xk - node(m));
                    }
                    der += term;
                    val *= (xi - node(i)) / (xk - node(i));
                }
                (val, der * 2.0 / self.h)
            }
        }
    }
}

/// Discontinuous tensor-product polynomial space of degree `K` per axis.
/// Local index `k = p + (K+1) q` with `p` along x.
#[derive(Debug, Clone)]
pub struct DgSpace {
    mesh: SpatialMesh,
    degree: usize,
    kind: BasisKind,
    pub ax: AxisBasis,
    pub ay: AxisBasis,
    n_loc: usize,
    mass: Vec<f64>,
    identity_mass: bool,
}

impl DgSpace {
    pub fn new(mesh: SpatialMesh, degree: usize, kind: BasisKind) -> Self {
        let ax = AxisBasis::new(kind, degree, mesh.h(0));
        let ay = if mesh.dim() == 2 {
            AxisBasis::new(kind, degree, mesh.h(1))
        } else {
            AxisBasis::trivial()
        };
        let n_loc = ax.len() * ay.len();
        let mut s = Self {
            mesh,
            degree,
            kind,
            ax,
            ay,
            n_loc,
            mass: vec![],
            identity_mass: false,
        };
        s.mass = s.kron(&s.ax.mass, &s.ay.mass);
        s.identity_mass = kind == BasisKind::OrthonormalLegendre;
        s
    }

    /// Row-major local matrix `X[p,p'] Y[q,q']` in the local index layout.
    pub fn kron(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let nx = self.ax.len();
        let ny = self.ay.len();
        let n = self.n_loc;
        let mut out = vec![0.0; n * n];
        for q in 0..ny {
            for p in 0..nx {
                let k = p + nx * q;
                for q2 in 0..ny {
                    for p2 in 0..nx {
                        let l = p2 + nx * q2;
                        out[k * n + l] = x[p * nx + p2] * y[q * ny + q2];
                    }
                }
            }
        }
        out
    }

    /// Local vector `x[p] y[q]`.
    pub fn kron_vec(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let nx = self.ax.len();
        let mut out = vec![0.0; self.n_loc];
        for (q, yq) in y.iter().enumerate() {
            for (p, xp) in x.iter().enumerate() {
                out[p + nx * q] = xp * yq;
            }
        }
        out
    }

    pub fn mesh(&self) -> &SpatialMesh {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn n_loc(&self) -> usize {
        self.n_loc
    }

    pub fn n_elements(&self) -> usize {
        self.mesh.n_elements()
    }

    /// Spatial degrees of freedom.
    pub fn n_dof(&self) -> usize {
        self.n_loc * self.mesh.n_elements()
    }

    /// Row-major local mass matrix, shared by all elements.
    pub fn local_mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn has_identity_mass(&self) -> bool {
        self.identity_mass
    }

    /// Reference coordinates of a physical point inside element `e`.
    pub fn to_reference(&self, e: usize, x: [f64; 2]) -> [f64; 2] {
        let b = self.mesh.element_box(e);
        let mut r = [0.0; 2];
        for a in 0..self.dim() {
            r[a] = 2.0 * (x[a] - b.lower[a]) / (b.upper[a] - b.lower[a]) - 1.0;
        }
        r
    }

    /// Physical coordinates of a reference point in element `e`.
    pub fn to_physical(&self, e: usize, xi: [f64; 2]) -> [f64; 2] {
        let b = self.mesh.element_box(e);
        let mut x = [0.0; 2];
        for a in 0..self.dim() {
            x[a] = b.lower[a] + 0.5 * (xi[a] + 1.0) * (b.upper[a] - b.lower[a]);
        }
        x
    }

    /// Values of all local basis functions at a reference point.
    pub fn basis_values(&self, xi: [f64; 2]) -> Vec<f64> {
        let vx: Vec<f64> = (0..self.ax.len())
            .map(|p| self.ax.eval(p, xi[0]).0)
            .collect();
        let vy: Vec<f64> = (0..self.ay.len())
            .map(|q| self.ay.eval(q, xi[1]).0)
            .collect();
        self.kron_vec(&vx, &vy)
    }

    /// Tensor Gauss rule on the reference element with `n` points per axis:
    /// `(reference point, weight including the Jacobian)`.
    pub fn element_rule(&self, n: usize) -> Vec<([f64; 2], f64)> {
        let (x, w) = gauss_legendre(n);
        let jx = 0.5 * self.mesh.h(0);
        if self.dim() == 1 {
            return x
                .iter()
                .zip(&w)
                .map(|(&xi, &wi)| ([xi, 0.0], wi * jx))
                .collect();
        }
        let jy = 0.5 * self.mesh.h(1);
        let mut out = Vec::with_capacity(n * n);
        for (&yi, &wy) in x.iter().zip(&w) {
            for (&xi, &wx) in x.iter().zip(&w) {
                out.push(([xi, yi], wx * wy * jx * jy));
            }
        }
        out
    }

    /// Evaluates a DG function with local coefficients `coeffs` at a physical point of `e`.
    pub fn eval_local(&self, e: usize, coeffs: &[f64], x: [f64; 2]) -> f64 {
        let v = self.basis_values(self.to_reference(e, x));
        v.iter().zip(coeffs).map(|(a, b)| a * b).sum()
    }

    /// L2 projection of a scalar DG function from another space on the same domain.
    /// Exact when every element of `self` lies inside one element of `src` and the
    /// degrees match.
    pub fn project_from(&self, src: &DgSpace, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != src.n_dof() {
            return Err(Error::DimensionMismatch {
                expected: src.n_dof(),
                got: coeffs.len(),
            });
        }
        if src.dim() != self.dim()
            || src.mesh.lower() != self.mesh.lower()
            || src.mesh.upper() != self.mesh.upper()
        {
            return Err(Error::InvalidMesh(
                "projection between different domains".into(),
            ));
        }
        let nl = self.n_loc;
        let ns = src.n_loc;
        let rule = self.element_rule(self.degree + src.degree + 2);
        let mass = DMatrix::from_row_slice(nl, nl, &self.mass).lu();
        let mut out = vec![0.0; self.n_dof()];
        for e in 0..self.n_elements() {
            let mut rhs = nalgebra::DVector::zeros(nl);
            for (xi, w) in &rule {
                let x = self.to_physical(e, *xi);
                let es = src.mesh.locate(x).ok_or_else(|| {
                    Error::InvalidMesh(format!("point {x:?} outside the source mesh"))
                })?;
                let v = src.eval_local(es, &coeffs[es * ns..(es + 1) * ns], x);
                for (k, phi) in self.basis_values(*xi).into_iter().enumerate() {
                    rhs[k] += w * phi * v;
                }
            }
            let local = if self.identity_mass {
                rhs
            } else {
                mass.solve(&rhs).ok_or(Error::SingularMatrix)?
            };
            out[e * nl..(e + 1) * nl].copy_from_slice(local.as_slice());
        }
        Ok(out)
    }

    /// Local L2 projection weights: coefficients of the constant function 1.
    pub fn constant_coefficients(&self) -> Vec<f64> {
        let integ = self.kron_vec(&self.ax.integral, &self.ay.integral);
        let m = DMatrix::from_row_slice(self.n_loc, self.n_loc, &self.mass);
        let rhs = nalgebra::DVector::from_vec(integ);
        let sol = m.lu().solve(&rhs).expect("local mass matrix is invertible");
        sol.iter().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_projection_is_exact() {
        let coarse = DgSpace::new(
            SpatialMesh::rectangle([0.0, 0.0], [1.0, 2.0], 3, 2).unwrap(),
            1,
            BasisKind::OrthonormalLegendre,
        );
        let fine = DgSpace::new(
            SpatialMesh::rectangle([0.0, 0.0], [1.0, 2.0], 6, 4).unwrap(),
            1,
            BasisKind::OrthonormalLegendre,
        );
        let coeffs: Vec<f64> = (0..coarse.n_dof())
            .map(|i| (i as f64 * 0.37).sin())
            .collect();
        let p = fine.project_from(&coarse, &coeffs).unwrap();
        for e in 0..fine.n_elements() {
            for xi in [[-0.3, 0.2], [0.7, -0.9]] {
                let x = fine.to_physical(e, xi);
                let ec = coarse.mesh().locate(x).unwrap();
                let want = coarse.eval_local(ec, &coeffs[4 * ec..4 * ec + 4], x);
                let got = fine.eval_local(e, &p[4 * e..4 * e + 4], x);
                assert!((want - got).abs() < 1e-13);
            }
        }
        // and back: the coarse projection of a fine function preserves element means
        let back = coarse.project_from(&fine, &p).unwrap();
        for (a, b) in back.iter().zip(&coeffs) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn orthonormal_mass_is_identity() {
        let mesh = SpatialMesh::rectangle([0.0, 0.0], [1.0, 2.0], 3, 5).unwrap();
        let s = DgSpace::new(mesh, 2, BasisKind::OrthonormalLegendre);
        let n = s.n_loc();
        assert_eq!(n, 9);
        for k in 0..n {
            for l in 0..n {
                let e = if k == l { 1.0 } else { 0.0 };
                assert!((s.local_mass()[k * n + l] - e).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn legendre_stiffness_closed_form() {
        // ∫ a_k' a_l = sqrt((2k+1)(2l+1))/h * 2 when l < k and k+l odd
        let h = 0.3;
        let b = AxisBasis::new(BasisKind::OrthonormalLegendre, 3, h);
        for k in 0..4 {
            for l in 0..4 {
                let exact = if l < k && (k + l) % 2 == 1 {
                    (((2 * k + 1) * (2 * l + 1)) as f64).sqrt() / h * 2.0
                } else {
                    0.0
                };
                assert!((b.stiff[k * 4 + l] - exact).abs() < 1e-12, "{k} {l}");
            }
        }
        assert!((b.right[1] - (3.0 / h).sqrt()).abs() < 1e-13);
        assert!((b.left[1] + (3.0 / h).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn nodal_basis_interpolates() {
        let b = AxisBasis::new(BasisKind::Nodal, 2, 1.0);
        for k in 0..3 {
            for i in 0..3 {
                let xi = -1.0 + i as f64;
                let e = if i == k { 1.0 } else { 0.0 };
                assert!((b.eval(k, xi).0 - e).abs() < 1e-14);
            }
        }
        // derivative of l_0 = (x)(x-1)/2 at x=-1 is -3/2 on reference; scaled by 2/h
        assert!((b.eval(0, -1.0).1 - (-1.5 * 2.0)).abs() < 1e-13);
    }

    #[test]
    fn constant_projection() {
        let mesh = SpatialMesh::interval(0.0, 1.0, 4).unwrap();
        for kind in [BasisKind::OrthonormalLegendre, BasisKind::Nodal] {
            let s = DgSpace::new(mesh.clone(), 1, kind);
            let c = s.constant_coefficients();
            assert!((s.eval_local(2, &c, [0.61, 0.0]) - 1.0).abs() < 1e-13);
        }
    }
}
