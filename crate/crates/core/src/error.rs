use thiserror::Error;

/// Errors raised by the geometry, level-set, normal-operator and solver layers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("polytope is empty")]
    EmptyPolytope,

    #[error("polyhedron is unbounded along direction {direction:?}")]
    Unbounded { direction: Vec<f64> },

    #[error("scale bound exceeded: {what} ({value} > {limit})")]
    ScaleBound {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("weights must be nonnegative and sum to 1 (sum = {sum})")]
    InvalidWeights { sum: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("no active chart covers {point:?}")]
    CoverageHole { point: Vec<f64> },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("schema error at `{field}`: {message}")]
    Schema { field: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
