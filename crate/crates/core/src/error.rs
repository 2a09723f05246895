//! Error type shared across the crate.

use crate::fom::FomSolution;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid quadrature: {0}")]
    InvalidQuadrature(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("material region is not aligned with element boundaries: {0}")]
    MisalignedRegion(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular local block in element {element} for direction {direction}")]
    SingularLocalBlock { element: usize, direction: usize },

    #[error(
        "diffusion correction is undefined: total cross section vanishes in element {element}"
    )]
    SingularDiffusion { element: usize },

    #[error(
        "source iteration did not converge within {iterations} iterations (last change {change:e})"
    )]
    NotConverged {
        iterations: usize,
        change: f64,
        last: Box<FomSolution>,
    },

    #[error("singular matrix")]
    SingularMatrix,

    #[error("new snapshot is numerically dependent on the basis (relative remainder {ratio:e})")]
    NearDependence { ratio: f64 },

    #[error("pivoted QR of a zero matrix")]
    ZeroMatrix,

    #[error("reduced least-squares problem is ill-posed: rank {rank} < basis size {m}")]
    RankDeficient { rank: usize, m: usize },

    #[error("reduced system is ill-conditioned (estimate {0:e})")]
    IllConditioned(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown problem '{0}'")]
    UnknownProblem(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
