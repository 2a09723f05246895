//! Affine decomposition of the full-order operator and data.
//!
//! Global layout is direction-major: entry `(j, e, k)` sits at
//! `j * n_dof + e * n_loc + k`.

use super::space::DgSpace;
use super::transport::TransportOperator;
use crate::error::{Error, Result};
use crate::linalg::small::{gemv_add, gemv_t_add};
use crate::problem::{Coefficient, Field, FieldTerm, TransportProblem};
use crate::quadrature::AngularQuadrature;

/// Number of Gauss points per axis used for field integrals on an element.
/// Exact for the polynomial profiles at degree `K`, and far below the
/// discretization error for smooth non-polynomial profiles.
pub fn field_rule_points(degree: usize) -> usize {
    degree + 6
}

/// Independent square blocks, one per element, each row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagonal {
    pub n_blocks: usize,
    pub size: usize,
    pub data: Vec<f64>,
}

impl BlockDiagonal {
    pub fn zeros(n_blocks: usize, size: usize) -> Self {
        Self {
            n_blocks,
            size,
            data: vec![0.0; n_blocks * size * size],
        }
    }

    pub fn block(&self, e: usize) -> &[f64] {
        let s = self.size * self.size;
        &self.data[e * s..(e + 1) * s]
    }

    pub fn block_mut(&mut self, e: usize) -> &mut [f64] {
        let s = self.size * self.size;
        &mut self.data[e * s..(e + 1) * s]
    }

    /// `y += alpha * S x` on a spatial vector.
    pub fn apply_add(&self, x: &[f64], alpha: f64, y: &mut [f64]) {
        let n = self.size;
        for e in 0..self.n_blocks {
            gemv_add(
                self.block(e),
                n,
                n,
                &x[e * n..(e + 1) * n],
                alpha,
                &mut y[e * n..(e + 1) * n],
            );
        }
    }

    pub fn apply_transpose_add(&self, x: &[f64], alpha: f64, y: &mut [f64]) {
        let n = self.size;
        for e in 0..self.n_blocks {
            gemv_t_add(
                self.block(e),
                n,
                n,
                &x[e * n..(e + 1) * n],
                alpha,
                &mut y[e * n..(e + 1) * n],
            );
        }
    }

    /// `self += alpha * other`
    pub fn add_scaled(&mut self, alpha: f64, other: &BlockDiagonal) {
        if alpha == 0.0 {
            return;
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0.0)
    }
}

/// `∫ field φ_k φ_l` on every element.
pub fn assemble_field_blocks(space: &DgSpace, field: &Field) -> Result<BlockDiagonal> {
    let n = space.n_loc();
    let dim = space.dim();
    let mesh = space.mesh();
    let mut out = BlockDiagonal::zeros(mesh.n_elements(), n);
    let rule = space.element_rule(field_rule_points(space.degree()));
    let values: Vec<Vec<f64>> = rule.iter().map(|(xi, _)| space.basis_values(*xi)).collect();
    for e in 0..mesh.n_elements() {
        if !field.support.covers_element(&mesh.element_box(e), dim)? {
            continue;
        }
        let blk = out.block_mut(e);
        for ((xi, w), phi) in rule.iter().zip(&values) {
            let s = w * field.profile.eval(space.to_physical(e, *xi), dim);
            if s == 0.0 {
                continue;
            }
            for k in 0..n {
                let sk = s * phi[k];
                for l in 0..n {
                    blk[k * n + l] += sk * phi[l];
                }
            }
        }
    }
    Ok(out)
}

/// Which physical process an affine operator term describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermKind {
    Transport,
    Scattering,
    Absorption,
}

/// One parameter-independent cross-section term with its coefficient.
#[derive(Debug, Clone)]
pub struct CrossSectionTerm {
    pub coefficient: Coefficient,
    pub blocks: BlockDiagonal,
}

/// `A(mu) = D + Σ θ_s Σ_s + Σ θ_a Σ_a`, terms ordered transport, scattering, absorption.
#[derive(Debug, Clone)]
pub struct AffineOperatorFamily {
    pub transport: TransportOperator,
    pub scattering: Vec<CrossSectionTerm>,
    pub absorption: Vec<CrossSectionTerm>,
    weights: Vec<f64>,
    n_dof: usize,
    n_loc: usize,
}

fn cross_section_terms(space: &DgSpace, terms: &[FieldTerm]) -> Result<Vec<CrossSectionTerm>> {
    terms
        .iter()
        .map(|t| {
            Ok(CrossSectionTerm {
                coefficient: t.coefficient.clone(),
                blocks: assemble_field_blocks(space, &t.field)?,
            })
        })
        .collect()
}

impl AffineOperatorFamily {
    pub fn assemble(
        space: &DgSpace,
        quad: &AngularQuadrature,
        problem: &TransportProblem,
    ) -> Result<Self> {
        Ok(Self {
            transport: TransportOperator::assemble(space, quad),
            scattering: cross_section_terms(space, &problem.scattering)?,
            absorption: cross_section_terms(space, &problem.absorption)?,
            weights: quad.weights().to_vec(),
            n_dof: space.n_dof(),
            n_loc: space.n_loc(),
        })
    }

    pub fn q_a(&self) -> usize {
        1 + self.scattering.len() + self.absorption.len()
    }

    pub fn n_directions(&self) -> usize {
        self.weights.len()
    }

    pub fn n_dof(&self) -> usize {
        self.n_dof
    }

    pub fn n_loc(&self) -> usize {
        self.n_loc
    }

    /// Full-order dimension.
    pub fn len(&self) -> usize {
        self.n_dof * self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn term_kind(&self, q: usize) -> TermKind {
        if q == 0 {
            TermKind::Transport
        } else if q <= self.scattering.len() {
            TermKind::Scattering
        } else {
            TermKind::Absorption
        }
    }

    fn term_blocks(&self, q: usize) -> &BlockDiagonal {
        let ns = self.scattering.len();
        if q <= ns {
            &self.scattering[q - 1].blocks
        } else {
            &self.absorption[q - 1 - ns].blocks
        }
    }

    /// Coefficients `[1, θ_s..., θ_a...]`.
    pub fn theta(&self, mu: &[f64]) -> Vec<f64> {
        let mut t = Vec::with_capacity(self.q_a());
        t.push(1.0);
        t.extend(self.scattering.iter().map(|s| s.coefficient.eval(mu)));
        t.extend(self.absorption.iter().map(|s| s.coefficient.eval(mu)));
        t
    }

    /// Combined scattering blocks at `mu`.
    pub fn scattering_blocks(&self, mu: &[f64]) -> BlockDiagonal {
        let mut s = BlockDiagonal::zeros(self.n_dof / self.n_loc, self.n_loc);
        for t in &self.scattering {
            s.add_scaled(t.coefficient.eval(mu), &t.blocks);
        }
        s
    }

    /// Combined absorption blocks at `mu`.
    pub fn absorption_blocks(&self, mu: &[f64]) -> BlockDiagonal {
        let mut s = BlockDiagonal::zeros(self.n_dof / self.n_loc, self.n_loc);
        for t in &self.absorption {
            s.add_scaled(t.coefficient.eval(mu), &t.blocks);
        }
        s
    }

    /// Scalar flux `Σ_j ω_j g_j`.
    pub fn angular_mean(&self, g: &[f64]) -> Vec<f64> {
        let mut rho = vec![0.0; self.n_dof];
        for (j, w) in self.weights.iter().enumerate() {
            for (r, x) in rho.iter_mut().zip(&g[j * self.n_dof..(j + 1) * self.n_dof]) {
                *r += w * x;
            }
        }
        rho
    }

    fn check_len(&self, g: &[f64], out: &[f64]) -> Result<()> {
        for len in [g.len(), out.len()] {
            if len != self.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.len(),
                    got: len,
                });
            }
        }
        Ok(())
    }

    /// `out = term_q g`.
    pub fn apply_term(&self, q: usize, g: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_len(g, out)?;
        out.iter_mut().for_each(|x| *x = 0.0);
        let nd = self.n_dof;
        match self.term_kind(q) {
            TermKind::Transport => {
                for j in 0..self.n_directions() {
                    self.transport.apply_direction_add(
                        j,
                        &g[j * nd..(j + 1) * nd],
                        &mut out[j * nd..(j + 1) * nd],
                    );
                }
            }
            TermKind::Scattering => {
                let blocks = self.term_blocks(q);
                let rho = self.angular_mean(g);
                let mut s_rho = vec![0.0; nd];
                blocks.apply_add(&rho, 1.0, &mut s_rho);
                for j in 0..self.n_directions() {
                    let oj = &mut out[j * nd..(j + 1) * nd];
                    blocks.apply_add(&g[j * nd..(j + 1) * nd], 1.0, oj);
                    for (o, s) in oj.iter_mut().zip(&s_rho) {
                        *o -= s;
                    }
                }
            }
            TermKind::Absorption => {
                let blocks = self.term_blocks(q);
                for j in 0..self.n_directions() {
                    blocks.apply_add(
                        &g[j * nd..(j + 1) * nd],
                        1.0,
                        &mut out[j * nd..(j + 1) * nd],
                    );
                }
            }
        }
        Ok(())
    }

    /// `out = term_q^T g`.
    pub fn apply_term_transpose(&self, q: usize, g: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_len(g, out)?;
        out.iter_mut().for_each(|x| *x = 0.0);
        let nd = self.n_dof;
        match self.term_kind(q) {
            TermKind::Transport => {
                for j in 0..self.n_directions() {
                    self.transport.apply_direction_transpose_add(
                        j,
                        &g[j * nd..(j + 1) * nd],
                        &mut out[j * nd..(j + 1) * nd],
                    );
                }
            }
            TermKind::Scattering => {
                // ((I - 1 ω^T) ⊗ S)^T = (I - ω 1^T) ⊗ S^T
                let blocks = self.term_blocks(q);
                let mut sum = vec![0.0; nd];
                for j in 0..self.n_directions() {
                    for (s, x) in sum.iter_mut().zip(&g[j * nd..(j + 1) * nd]) {
                        *s += x;
                    }
                }
                let mut st_sum = vec![0.0; nd];
                blocks.apply_transpose_add(&sum, 1.0, &mut st_sum);
                for (j, w) in self.weights.iter().enumerate() {
                    let oj = &mut out[j * nd..(j + 1) * nd];
                    blocks.apply_transpose_add(&g[j * nd..(j + 1) * nd], 1.0, oj);
                    for (o, s) in oj.iter_mut().zip(&st_sum) {
                        *o -= w * s;
                    }
                }
            }
            TermKind::Absorption => {
                let blocks = self.term_blocks(q);
                for j in 0..self.n_directions() {
                    blocks.apply_transpose_add(
                        &g[j * nd..(j + 1) * nd],
                        1.0,
                        &mut out[j * nd..(j + 1) * nd],
                    );
                }
            }
        }
        Ok(())
    }

    /// `A(mu) g`, with the scattering coupling applied structurally.
    pub fn apply(&self, mu: &[f64], g: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.check_len(g, &out)?;
        let nd = self.n_dof;
        let sig_s = self.scattering_blocks(mu);
        let mut sig_t = self.absorption_blocks(mu);
        sig_t.add_scaled(1.0, &sig_s);
        let rho = self.angular_mean(g);
        let mut s_rho = vec![0.0; nd];
        sig_s.apply_add(&rho, 1.0, &mut s_rho);
        for j in 0..self.n_directions() {
            let gj = &g[j * nd..(j + 1) * nd];
            let oj = &mut out[j * nd..(j + 1) * nd];
            self.transport.apply_direction_add(j, gj, oj);
            sig_t.apply_add(gj, 1.0, oj);
            for (o, s) in oj.iter_mut().zip(&s_rho) {
                *o -= s;
            }
        }
        Ok(out)
    }
}

/// `b(mu) = Σ θ_b b^q`.
#[derive(Debug, Clone)]
pub struct AffineVectorFamily {
    pub coefficients: Vec<Coefficient>,
    pub terms: Vec<Vec<f64>>,
    /// Full-order length, kept so an empty family still evaluates to a zero vector.
    pub len: usize,
}

impl AffineVectorFamily {
    pub fn assemble(
        space: &DgSpace,
        quad: &AngularQuadrature,
        problem: &TransportProblem,
    ) -> Result<Self> {
        let nd = space.n_dof();
        let n = space.n_loc();
        let dim = space.dim();
        let mesh = space.mesh();
        let [cx, cy] = mesh.cells();
        let mut terms = Vec::with_capacity(problem.data.len());
        for d in &problem.data {
            let mut b = vec![0.0; nd * quad.len()];
            let mut src = vec![0.0; nd];
            if let Some(field) = &d.source {
                let rule = space.element_rule(field_rule_points(space.degree()));
                let values: Vec<Vec<f64>> =
                    rule.iter().map(|(xi, _)| space.basis_values(*xi)).collect();
                for e in 0..mesh.n_elements() {
                    if !field.support.covers_element(&mesh.element_box(e), dim)? {
                        continue;
                    }
                    for ((xi, w), phi) in rule.iter().zip(&values) {
                        let s = w * field.profile.eval(space.to_physical(e, *xi), dim);
                        for k in 0..n {
                            src[e * n + k] += s * phi[k];
                        }
                    }
                }
            }
            for j in 0..quad.len() {
                let bj = &mut b[j * nd..(j + 1) * nd];
                bj.copy_from_slice(&src);
                let v = quad.node(j);
                for face in &d.inflow {
                    if face.axis >= dim {
                        return Err(Error::Config(format!(
                            "inflow on axis {} of a {dim}-dimensional domain",
                            face.axis
                        )));
                    }
                    let va = v[face.axis];
                    // only incoming directions see the boundary value
                    let incoming = if face.high_side { va < 0.0 } else { va > 0.0 };
                    if !incoming {
                        continue;
                    }
                    // -∫ g (v·n) φ_k over the face, with v·n = -|v_a|
                    let (this, other) = if face.axis == 0 {
                        (&space.ax, &space.ay)
                    } else {
                        (&space.ay, &space.ax)
                    };
                    let trace = if face.high_side {
                        &this.right
                    } else {
                        &this.left
                    };
                    let tr: Vec<f64> = trace.iter().map(|t| face.value * va.abs() * t).collect();
                    let local = if face.axis == 0 {
                        space.kron_vec(&tr, &other.integral)
                    } else {
                        space.kron_vec(&other.integral, &tr)
                    };
                    let fixed = if face.high_side {
                        cells_minus_one(face.axis, cx, cy)
                    } else {
                        0
                    };
                    let count = if face.axis == 0 { cy } else { cx };
                    for t in 0..count {
                        let e = if face.axis == 0 {
                            mesh.index(fixed, t)
                        } else {
                            mesh.index(t, fixed)
                        };
                        for k in 0..n {
                            bj[e * n + k] += local[k];
                        }
                    }
                }
            }
            terms.push(b);
        }
        Ok(Self {
            coefficients: problem.data.iter().map(|d| d.coefficient.clone()).collect(),
            terms,
            len: nd * quad.len(),
        })
    }

    pub fn q_b(&self) -> usize {
        self.terms.len()
    }

    pub fn theta(&self, mu: &[f64]) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.eval(mu)).collect()
    }

    pub fn eval(&self, mu: &[f64]) -> Vec<f64> {
        let mut b = vec![0.0; self.len];
        for (c, t) in self.theta(mu).iter().zip(&self.terms) {
            if *c != 0.0 {
                for (bi, ti) in b.iter_mut().zip(t) {
                    *bi += c * ti;
                }
            }
        }
        b
    }
}

fn cells_minus_one(axis: usize, cx: usize, cy: usize) -> usize {
    if axis == 0 {
        cx - 1
    } else {
        cy - 1
    }
}
