use thiserror::Error;

/// Errors raised by the solvers and their supporting primitives.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("degenerate problem: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("diagnostic unavailable: {0}")]
    DiagnosticUnavailable(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by the input data rather than by the caller's
    /// configuration or by the numerics.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Input(_) | Error::Schema(_) | Error::EmptyDataset(_) | Error::Csv(_)
        )
    }

    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Numerical(_) | Error::Degenerate(_) | Error::DiagnosticUnavailable(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
