use thiserror::Error;

/// Errors raised while constructing or combining geometric data.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: String,
        found: String,
    },
    #[error("gram matrix is not symmetric (relative asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("gram matrix is not positive definite (pivot {0:e})")]
    NotPositiveDefinite(f64),
    #[error("operator metrics do not match in {0}")]
    MetricMismatch(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("{kind} equation violated (residual {residual:e})")]
    StructureViolation { kind: String, residual: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("tensor symmetry violated: {0}")]
    SymmetryViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(
        context: impl Into<String>,
        expected: impl ToString,
        found: impl ToString,
    ) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
