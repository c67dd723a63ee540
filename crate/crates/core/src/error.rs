//! Error type shared across the crate.

/// Errors produced by solver, metric, and linear-algebra operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input vector or matrix had the wrong dimension.
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    /// A value that must be finite was NaN or infinite.
    #[error("non-finite value rejected in {context}")]
    NonFinite { context: &'static str },

    /// A parameter that must be strictly positive was not.
    #[error("parameter `{name}` must be > 0, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    /// Power iteration did not settle within the iteration budget.
    #[error("operator norm estimate did not converge in {max_iter} iterations (last estimate {last_estimate})")]
    OpNormDidNotConverge { max_iter: usize, last_estimate: f64 },

    /// Jacobi sweeps did not reduce the off-diagonal mass enough.
    #[error("symmetric eigenvalue iteration did not converge in {sweeps} sweeps (off-diagonal norm {off_norm})")]
    EigDidNotConverge { sweeps: usize, off_norm: f64 },

    /// A matrix expected to be symmetric was not (within 1e-12).
    #[error("matrix is not symmetric: max |M - M^T| entry is {max_asymmetry}")]
    NotSymmetric { max_asymmetry: f64 },

    /// A subgradient selection was requested at a point where the
    /// subdifferential is empty (outside the domain of the function).
    #[error("empty subdifferential: {context}")]
    EmptySubdifferential { context: String },

    /// A V-inner square came out negative beyond rounding tolerance.
    #[error("metric is not positive definite: squared norm evaluated to {value}")]
    IndefiniteMetric { value: f64 },

    /// A dense linear system had a (numerically) zero pivot.
    #[error("singular linear system in {context}")]
    SingularSystem { context: &'static str },

    /// An operation restricted to quadratic-distance terms was called
    /// with a different function kind.
    #[error("{op} requires quadratic-distance f and g")]
    RequiresQuadratic { op: &'static str },

    /// A ground-truth computation failed its own certificate. This flags a
    /// broken test fixture, not a solver defect.
    #[error("oracle failed to certify a solution in {context} (best residual {best_residual})")]
    OracleCertification {
        context: &'static str,
        best_residual: f64,
    },

    /// The solver configuration was rejected before any iteration ran.
    #[error("invalid solver config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
