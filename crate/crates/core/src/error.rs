use thiserror::Error;

/// Errors raised by the partition, sweep, coalescent and statistics layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("size limit exceeded: {what} = {value} (limit {limit})")]
    SizeLimit {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    /// A field of an input document failed validation.
    #[error("invalid field `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("unsupported measure: {0}")]
    UnsupportedMeasure(String),

    /// The series defining rho does not converge for this measure.
    #[error("divergent series: {0}")]
    Divergent(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("incomplete tree: {0}")]
    IncompleteTree(String),

    #[error("degenerate mark: {0}")]
    DegenerateMark(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Validation {
        field: field.into(),
        reason: reason.into(),
    }
}
