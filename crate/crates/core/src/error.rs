use thiserror::Error;

/// Errors surfaced by the numerical layers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A profile, grid, or parameter set is structurally invalid.
    #[error("configuration error: {0}")]
    Config(String),

    /// A matching matrix is singular (zero wavenumber).
    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    /// A quantity that two routes must agree on failed its consistency check.
    #[error("numerical consistency failure: {0}")]
    Consistency(String),

    /// The normalization kernel degenerated (non-positive diagonal).
    #[error("degenerate normalization: {0}")]
    DegenerateNormalization(String),

    /// Time-step or grid-step constraint violated, or instability detected.
    #[error("step-size error: {0}")]
    StepSize(String),

    /// A transmission-weighted integral underflowed; use the log-scaled path.
    #[error("underflow: {0}")]
    Underflow(String),

    /// Malformed tabulated input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
