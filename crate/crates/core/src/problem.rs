//! Physical description of a parametric transport problem: cross sections and
//! data as finite sums of parameter coefficients times spatial fields.

use crate::error::{Error, Result};
use crate::mesh::AxisBox;
use serde::{Deserialize, Serialize};

/// A point in parameter space.
pub type Parameter = Vec<f64>;

/// Scalar coefficient depending affinely on the parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Coefficient {
    Constant(f64),
    /// `offset + weights · mu`
    Affine {
        offset: f64,
        weights: Vec<f64>,
    },
}

impl Coefficient {
    /// The `i`-th parameter component of a `d`-dimensional parameter.
    pub fn component(i: usize, d: usize) -> Self {
        let mut weights = vec![0.0; d];
        weights[i] = 1.0;
        Coefficient::Affine {
            offset: 0.0,
            weights,
        }
    }

    pub fn eval(&self, mu: &[f64]) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Affine { offset, weights } => {
                offset + weights.iter().zip(mu).map(|(w, m)| w * m).sum::<f64>()
            }
        }
    }
}

/// Spatial profile of a field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Profile {
    Constant(f64),
    /// `value + slope · x`
    Linear {
        value: f64,
        slope: [f64; 2],
    },
    /// `amplitude * exp(-rate * |x - center|^2)`
    Gaussian {
        amplitude: f64,
        center: [f64; 2],
        rate: f64,
    },
}

impl Profile {
    pub fn eval(&self, x: [f64; 2], dim: usize) -> f64 {
        match self {
            Profile::Constant(c) => *c,
            Profile::Linear { value, slope } => {
                value + (0..dim).map(|a| slope[a] * x[a]).sum::<f64>()
            }
            Profile::Gaussian {
                amplitude,
                center,
                rate,
            } => {
                let r2: f64 = (0..dim).map(|a| (x[a] - center[a]).powi(2)).sum();
                amplitude * (-rate * r2).exp()
            }
        }
    }

    pub fn is_polynomial(&self) -> bool {
        !matches!(self, Profile::Gaussian { .. })
    }
}

/// Where a field is switched on. Boxes must be aligned with element boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Support {
    Everywhere,
    Inside(Vec<AxisBox>),
    Outside(Vec<AxisBox>),
}

fn overlap(a: &AxisBox, b: &AxisBox, dim: usize) -> f64 {
    (0..dim)
        .map(|k| (a.upper[k].min(b.upper[k]) - a.lower[k].max(b.lower[k])).max(0.0))
        .product()
}

fn measure(a: &AxisBox, dim: usize) -> f64 {
    (0..dim).map(|k| a.upper[k] - a.lower[k]).product()
}

impl Support {
    /// Whether the whole element lies in the support; errors when the element is cut.
    pub fn covers_element(&self, element: &AxisBox, dim: usize) -> Result<bool> {
        let boxes = match self {
            Support::Everywhere => return Ok(true),
            Support::Inside(b) | Support::Outside(b) => b,
        };
        let vol = measure(element, dim);
        let covered: f64 = boxes.iter().map(|b| overlap(element, b, dim)).sum();
        let tol = 1e-9 * vol;
        let inside = if covered <= tol {
            false
        } else if (covered - vol).abs() <= tol {
            true
        } else {
            return Err(Error::MisalignedRegion(format!(
                "element [{:?}, {:?}] is partially covered ({:.3e} of {:.3e})",
                element.lower, element.upper, covered, vol
            )));
        };
        Ok(match self {
            Support::Outside(_) => !inside,
            _ => inside,
        })
    }

    pub fn contains(&self, x: [f64; 2], dim: usize) -> bool {
        match self {
            Support::Everywhere => true,
            Support::Inside(b) => b.iter().any(|bx| bx.contains(x, dim)),
            Support::Outside(b) => !b.iter().any(|bx| bx.contains(x, dim)),
        }
    }
}

/// Spatial field with support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub profile: Profile,
    pub support: Support,
}

impl Field {
    pub fn everywhere(profile: Profile) -> Self {
        Self {
            profile,
            support: Support::Everywhere,
        }
    }

    pub fn eval(&self, x: [f64; 2], dim: usize) -> f64 {
        if self.support.contains(x, dim) {
            self.profile.eval(x, dim)
        } else {
            0.0
        }
    }
}

/// One affine term: `coefficient(mu) * field(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldTerm {
    pub coefficient: Coefficient,
    pub field: Field,
}

/// Isotropic inflow value prescribed on one side of the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InflowFace {
    pub axis: usize,
    /// `false` for the low end of the axis, `true` for the high end.
    pub high_side: bool,
    pub value: f64,
}

/// One affine data term: volumetric source plus boundary inflow, scaled together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataTerm {
    pub coefficient: Coefficient,
    pub source: Option<Field>,
    pub inflow: Vec<InflowFace>,
}

/// Parametric steady transport problem on an axis-aligned domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportProblem {
    pub dim: usize,
    pub lower: [f64; 2],
    pub upper: [f64; 2],
    pub param_dim: usize,
    pub scattering: Vec<FieldTerm>,
    pub absorption: Vec<FieldTerm>,
    pub data: Vec<DataTerm>,
}

fn sum_terms(terms: &[FieldTerm], x: [f64; 2], dim: usize, mu: &[f64]) -> f64 {
    terms
        .iter()
        .map(|t| t.coefficient.eval(mu) * t.field.eval(x, dim))
        .sum()
}

impl TransportProblem {
    pub fn sigma_s(&self, x: [f64; 2], mu: &[f64]) -> f64 {
        sum_terms(&self.scattering, x, self.dim, mu)
    }

    pub fn sigma_a(&self, x: [f64; 2], mu: &[f64]) -> f64 {
        sum_terms(&self.absorption, x, self.dim, mu)
    }

    pub fn source(&self, x: [f64; 2], mu: &[f64]) -> f64 {
        self.data
            .iter()
            .filter_map(|d| {
                d.source
                    .as_ref()
                    .map(|s| d.coefficient.eval(mu) * s.eval(x, self.dim))
            })
            .sum()
    }

    /// Number of affine operator terms including the transport term.
    pub fn q_a(&self) -> usize {
        1 + self.scattering.len() + self.absorption.len()
    }

    pub fn q_b(&self) -> usize {
        self.data.len()
    }

    pub fn check_parameter(&self, mu: &[f64]) -> Result<()> {
        if mu.len() != self.param_dim {
            return Err(Error::DimensionMismatch {
                expected: self.param_dim,
                got: mu.len(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_eval() {
        let c = Coefficient::component(1, 2);
        assert_eq!(c.eval(&[3.0, 7.0]), 7.0);
        assert_eq!(Coefficient::Constant(100.0).eval(&[1.0, 2.0]), 100.0);
    }

    #[test]
    fn support_alignment() {
        let s = Support::Inside(vec![AxisBox::interval(1.0, 4.0)]);
        assert!(!s.covers_element(&AxisBox::interval(0.5, 1.0), 1).unwrap());
        assert!(s.covers_element(&AxisBox::interval(1.0, 1.5), 1).unwrap());
        assert!(s.covers_element(&AxisBox::interval(0.75, 1.25), 1).is_err());
        let o = Support::Outside(vec![AxisBox::new([-0.5, -0.5], [0.5, 0.5])]);
        let inner = AxisBox::new([0.0, 0.0], [0.5, 0.5]);
        let outer = AxisBox::new([0.5, 0.0], [1.0, 0.5]);
        assert!(!o.covers_element(&inner, 2).unwrap());
        assert!(o.covers_element(&outer, 2).unwrap());
    }
}
