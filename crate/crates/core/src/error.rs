use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {max_asymmetry:.3e})")]
    NonHermitianInput { max_asymmetry: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix product of an empty list")]
    EmptyProduct,

    #[error("invalid {what}: {reason}")]
    InvalidInput { what: &'static str, reason: String },

    #[error("state outside the domain of the operation (probability {probability:.3e})")]
    OutOfDomain { probability: f64 },

    #[error("degenerate observer specification: {0}")]
    DegenerateSpec(String),

    #[error("count table has no runs under hypothesis {h}")]
    EmptyTable { h: u8 },

    #[error("conditional probability has a zero denominator: {0}")]
    ZeroDenominator(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("measurement is not a projection-valued measure: {0}")]
    NotAPvm(String),

    #[error("iteration cap of {iterations} reached without convergence (best infeasibility {best_t:.3e})")]
    NotConverged { iterations: usize, best_t: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            what,
            reason: reason.into(),
        }
    }
}
