//! A fully assembled full-order model for one discretization of a problem.

use super::affine::{AffineOperatorFamily, AffineVectorFamily, BlockDiagonal};
use super::space::{BasisKind, DgSpace};
use super::weighting::WeightingMatrix;
use crate::error::{Error, Result};
use crate::mesh::{build_sweep_orderings, SpatialMesh, SweepOrdering};
use crate::problem::TransportProblem;
use crate::quadrature::{chebyshev_legendre_sphere, gauss_legendre_slab, AngularQuadrature};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AngularSpec {
    /// Gauss-Legendre rule in the slab direction cosine.
    Slab(usize),
    /// Product rule on the sphere with `(n_theta, n_xi)` points.
    Sphere(usize, usize),
}

impl AngularSpec {
    pub fn build(&self) -> Result<AngularQuadrature> {
        match *self {
            AngularSpec::Slab(n) => gauss_legendre_slab(n),
            AngularSpec::Sphere(nt, nx) => chebyshev_legendre_sphere(nt, nx),
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            AngularSpec::Slab(n) => n,
            AngularSpec::Sphere(a, b) => a * b,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discretization {
    /// Element counts per axis (the second entry is ignored in 1D).
    pub cells: [usize; 2],
    pub degree: usize,
    pub basis: BasisKind,
    pub angular: AngularSpec,
}

impl Discretization {
    pub fn slab(nx: usize, nv: usize) -> Self {
        Self {
            cells: [nx, 1],
            degree: 1,
            basis: BasisKind::OrthonormalLegendre,
            angular: AngularSpec::Slab(nv),
        }
    }

    pub fn plane(nx: usize, ny: usize, n_theta: usize, n_xi: usize) -> Self {
        Self {
            cells: [nx, ny],
            degree: 1,
            basis: BasisKind::OrthonormalLegendre,
            angular: AngularSpec::Sphere(n_theta, n_xi),
        }
    }

    /// Full-order dimension for a problem of spatial dimension `dim`.
    pub fn full_order_len(&self, dim: usize) -> usize {
        let cells = if dim == 1 {
            self.cells[0]
        } else {
            self.cells[0] * self.cells[1]
        };
        cells * (self.degree + 1).pow(dim as u32) * self.angular.len()
    }
}

/// Assembled operator, data and auxiliary structures.
#[derive(Debug, Clone)]
pub struct FomSystem {
    pub problem: TransportProblem,
    pub discretization: Discretization,
    pub space: DgSpace,
    pub quad: AngularQuadrature,
    pub orderings: Vec<SweepOrdering>,
    pub operator: AffineOperatorFamily,
    pub data: AffineVectorFamily,
    pub weighting: WeightingMatrix,
}

impl FomSystem {
    pub fn assemble(problem: &TransportProblem, disc: &Discretization) -> Result<Self> {
        let mesh = match problem.dim {
            1 => SpatialMesh::interval(problem.lower[0], problem.upper[0], disc.cells[0])?,
            2 => {
                SpatialMesh::rectangle(problem.lower, problem.upper, disc.cells[0], disc.cells[1])?
            }
            d => return Err(Error::Config(format!("unsupported spatial dimension {d}"))),
        };
        let quad = disc.angular.build()?;
        match (problem.dim, quad.dim_v()) {
            (1, 1) | (2, 3) => {}
            (dx, dv) => {
                return Err(Error::Config(format!(
                    "angular rule of dimension {dv} does not fit a {dx}-dimensional domain"
                )))
            }
        }
        let space = DgSpace::new(mesh, disc.degree, disc.basis);
        let orderings = build_sweep_orderings(space.mesh(), &quad);
        let operator = AffineOperatorFamily::assemble(&space, &quad, problem)?;
        let data = AffineVectorFamily::assemble(&space, &quad, problem)?;
        let weighting = WeightingMatrix::new(&space, quad.weights());
        Ok(Self {
            problem: problem.clone(),
            discretization: *disc,
            space,
            quad,
            orderings,
            operator,
            data,
            weighting,
        })
    }

    /// Full-order dimension.
    pub fn len(&self) -> usize {
        self.operator.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_dof(&self) -> usize {
        self.space.n_dof()
    }

    pub fn n_directions(&self) -> usize {
        self.quad.len()
    }

    pub fn rhs(&self, mu: &[f64]) -> Vec<f64> {
        self.data.eval(mu)
    }

    pub fn apply(&self, mu: &[f64], g: &[f64]) -> Result<Vec<f64>> {
        self.operator.apply(mu, g)
    }

    /// `A(mu) g - b(mu)`.
    pub fn residual(&self, mu: &[f64], g: &[f64]) -> Result<Vec<f64>> {
        let mut r = self.apply(mu, g)?;
        for (ri, bi) in r.iter_mut().zip(self.rhs(mu)) {
            *ri -= bi;
        }
        Ok(r)
    }

    /// Discrete L2 norm of the residual function of `g`.
    pub fn residual_norm(&self, mu: &[f64], g: &[f64]) -> Result<f64> {
        Ok(self.weighting.residual_norm(&self.residual(mu, g)?))
    }

    pub fn norm(&self, g: &[f64]) -> f64 {
        self.weighting.norm(g)
    }

    pub fn scalar_flux(&self, g: &[f64]) -> Vec<f64> {
        self.operator.angular_mean(g)
    }

    /// Element means of the scattering and absorption cross sections at `mu`.
    pub fn element_means(&self, mu: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let ones = self.space.constant_coefficients();
        let vol = self.space.mesh().element_measure();
        let mean = |b: &BlockDiagonal| -> Vec<f64> {
            let n = b.size;
            (0..b.n_blocks)
                .map(|e| {
                    let blk = b.block(e);
                    let mut s = 0.0;
                    for k in 0..n {
                        for l in 0..n {
                            s += ones[k] * blk[k * n + l] * ones[l];
                        }
                    }
                    s / vol
                })
                .collect()
        };
        (
            mean(&self.operator.scattering_blocks(mu)),
            mean(&self.operator.absorption_blocks(mu)),
        )
    }
}
