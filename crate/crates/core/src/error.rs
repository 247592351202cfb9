use thiserror::Error;

/// Errors raised by the numerical routines, predictors and the risk engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("Gram matrix is numerically singular (scaled pivot {pivot:e})")]
    SingularGram { pivot: f64 },

    #[error("kernel matrix is numerically singular; design points must be distinct")]
    SingularKernel,

    #[error("feature matrix is rank deficient")]
    RankDeficientFeatures,

    #[error("observation lies in the feature column space (residual form {form:e})")]
    DegenerateObservation { form: f64 },

    #[error("quadrature did not converge: last two refinements {previous} and {current}")]
    QuadratureNotConverged { previous: f64, current: f64 },

    #[error("predictor {predictor} does not support dimension {dim}")]
    UnsupportedDimension { predictor: &'static str, dim: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),

    #[error("{undefined} of {total} samples were undefined")]
    TooManyUndefined { undefined: u64, total: u64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
