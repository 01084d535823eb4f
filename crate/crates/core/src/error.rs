use std::path::PathBuf;

/// Errors raised by every fallible operation in this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite entry at flat index {index}")]
    NonFinite { index: usize },

    #[error("matrix is not symmetric: max asymmetry {asymmetry:e}")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive definite: non-positive pivot at index {pivot} (value {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("matrix has a negative eigenvalue {value:e} below the null tolerance")]
    NotPositiveSemidefinite { value: f64 },

    #[error("frame is not tight: residual {residual:e} exceeds tolerance {tol:e}")]
    NotTight { residual: f64, tol: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error(
        "exact D-RIP enumeration needs {supports:.0} supports, above the budget of {budget}; \
         use Monte Carlo mode instead"
    )]
    BudgetExceeded { supports: f64, budget: u64 },

    #[error("matrix market parse error: {0}")]
    Parse(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
