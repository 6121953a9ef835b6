use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Factorization met a pivot below the relative threshold.
    #[error("singular operator: relative pivot {pivot:.3e}")]
    Singular { pivot: f64 },

    /// Right-hand side has a component outside the range of the operator.
    #[error("inconsistent right-hand side: relative component {component:.3e} outside the range")]
    InconsistentRhs { component: f64 },

    #[error("non-finite state at step {step} (t = {time})")]
    BlowUp { step: usize, time: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
