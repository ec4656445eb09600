use thiserror::Error;

/// Errors raised by the numerical pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point {x} lies outside [-1, 1]")]
    OutOfDomain { x: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("invalid bracket [{lo}, {hi}]: {reason}")]
    BracketInvalid { lo: f64, hi: f64, reason: String },

    #[error("truncation insufficient: {0}")]
    TruncationInsufficient(String),

    #[error("not at collision: eigenvalue gap {gap:.3e} exceeds {tol:.1e}")]
    NotAtCollision { gap: f64, tol: f64 },

    #[error("inconsistent right-hand side: solvability residual {residual:.3e}")]
    InconsistentRhs { residual: f64 },

    #[error("degenerate expansion: {0}")]
    DegenerateExpansion(String),

    #[error("degenerate normalization: |beta| = {beta:.3e}")]
    DegenerateNormalization { beta: f64 },

    #[error("invalid regime: {0}")]
    InvalidRegime(String),

    #[error("return map failure: {0}")]
    ReturnFailure(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than by the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::OutOfDomain { .. }
                | Error::BracketInvalid { .. }
                | Error::InvalidRegime(_)
                | Error::Config(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
