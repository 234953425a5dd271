use thiserror::Error;

/// Errors produced by the estimation library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A model or solver parameter is outside its admissible domain.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// The covariance matrix failed Cholesky factorization even after the
    /// jitter retry; `pivot` is the smallest pivot encountered.
    #[error("covariance matrix numerically degenerate (smallest pivot {pivot:.3e})")]
    Degeneracy { pivot: f64 },

    /// Kernel density evaluated on the diagonal s = t.
    #[error("kernel density singular at s = t = {0}")]
    DiagonalSingularity(f64),

    /// Operation not defined for the given model/parameter combination.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A fractional-derivative reconstruction failed its Abel residual check,
    /// i.e. the underlying integral equation has no integrable solution at
    /// the working resolution.
    #[error("non-solvable: Abel residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    NonSolvable { residual: f64, tolerance: f64 },

    /// Iterative solver failed to converge.
    #[error("no convergence after {iterations} iterations (operator norm estimate {norm_estimate:.3e})")]
    NonConvergence { iterations: usize, norm_estimate: f64 },

    /// Grids of two arguments do not line up.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A direct solver failed or its solution did not pass verification.
    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// Grid-refinement stability check failed for an ill-posed first-kind
    /// equation; carries the relative L2 discrepancy and a condition estimate.
    #[error("refinement instability: relative L2 change {change:.3e} (condition estimate {condition:.3e})")]
    RefinementInstability { change: f64, condition: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
