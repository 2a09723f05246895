//! Reduced basis reduced-order models for the parametric steady-state radiative
//! transfer equation, discretized by discrete ordinates in angle and upwind
//! discontinuous Galerkin in space.

pub mod bench;
pub mod dg;
pub mod error;
pub mod fom;
pub mod greedy;
pub mod linalg;
pub mod mesh;
pub mod problem;
pub mod quadrature;
pub mod rom;

pub use error::{Error, Result};
