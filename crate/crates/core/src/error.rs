//! Error types shared across the crate.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Per-iteration Newton statistics, recorded in [`Error::NonConvergence`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationStats {
    /// Max-norm of the Newton step taken in this iteration.
    pub step_norm: f64,
    /// Max-norm of the residual before the step.
    pub residual_norm: f64,
}

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates its contract (bad mesh parameters, ω < 0, ...).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Mesh construction produced a non-positive step.
    #[error("degenerate mesh: step h_{index} = {step:e} is not positive")]
    DegenerateMesh { index: usize, step: f64 },

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Vector/matrix sizes do not match the mesh.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A Thomas-elimination pivot fell below the singularity threshold.
    #[error("singular tridiagonal system: pivot {pivot:e} at row {row}")]
    SingularMatrix { row: usize, pivot: f64 },

    /// Newton's method exhausted its iteration budget.
    #[error(
        "Newton did not converge after {iterations} iterations \
         (last step norm {last_step:e}, last residual norm {last_residual:e})"
    )]
    NonConvergence {
        iterations: usize,
        last_step: f64,
        last_residual: f64,
        history: Vec<IterationStats>,
    },

    /// The problem has no closed-form solution to compare against.
    #[error("problem `{0}` has no exact solution")]
    MissingExact(String),

    /// Coarse and fine meshes do not share nodes where they must.
    #[error("mesh mismatch at coarse node {index}: coarse x = {coarse:e}, fine x = {fine:e}")]
    MeshMismatch { index: usize, coarse: f64, fine: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
