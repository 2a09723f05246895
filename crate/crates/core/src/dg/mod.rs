//! Upwind discontinuous Galerkin discretization in space combined with discrete
//! ordinates in angle.

pub mod affine;
pub mod space;
pub mod system;
pub mod transport;
pub mod weighting;

pub use affine::{AffineOperatorFamily, AffineVectorFamily, BlockDiagonal, TermKind};
pub use space::{BasisKind, DgSpace};
pub use system::{AngularSpec, Discretization, FomSystem};
pub use transport::TransportOperator;
pub use weighting::WeightingMatrix;
