use thiserror::Error;

/// Failure modes shared by the numerical kernels and evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported parameters: {0}")]
    Unsupported(String),

    /// An iterative method stopped before reaching its target accuracy.
    #[error("{what}: target accuracy not reached (error estimate {estimate:e}, partial value {partial})")]
    Precision {
        what: String,
        estimate: f64,
        partial: f64,
    },

    /// The series cap was hit while the neglected mixture mass was still above tolerance.
    #[error("series truncation cap of {cap} terms reached with tail mass {tail:e} (partial value {partial})")]
    TruncationCap { cap: usize, tail: f64, partial: f64 },

    #[error("consistency violation: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
