use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the simulation library.
///
/// Configuration problems (bad JSON, invalid parameter ranges) are kept
/// separate from contract violations (callers breaking a documented
/// precondition) so the CLI can map them to distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A physical-domain precondition failed, e.g. zero link distance.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented API precondition was violated by the caller.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// A bistatic measurement cannot correspond to any reflection point.
    #[error("infeasible measurement: {0}")]
    InfeasibleMeasurement(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// A linear solve or factorization failed beyond recovery.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("exhaustive search refused: {count} selectable users exceeds limit {max}")]
    TooManyUsers { count: usize, max: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for configuration errors, 3 for
    /// engine/contract errors, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::InvalidConfig(_) | Error::Json(_) => 2,
            Error::Domain(_)
            | Error::ContractViolation(_)
            | Error::InfeasibleMeasurement(_)
            | Error::DegenerateGeometry(_)
            | Error::Numerical(_)
            | Error::TooManyUsers { .. } => 3,
            Error::Io(_) => 1,
        }
    }
}
