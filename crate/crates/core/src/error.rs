use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("grid functions live on different grids")]
    IncompatibleGrids,

    #[error("vector has zero norm")]
    DegenerateVector,

    #[error("domain half-width {a} is smaller than the required {required}")]
    DomainTooSmall { a: f64, required: f64 },

    #[error("density is singular at z = 0")]
    SingularPoint,

    #[error("vector {index} is numerically dependent on its predecessors")]
    RankDeficient { index: usize },

    #[error("non-positive expectation {value:e} for state {state} at iteration {iteration}; reduce h")]
    SpectralBreakdown {
        state: usize,
        iteration: usize,
        value: f64,
    },

    #[error("dimension {dim} exceeds the dense limit {limit}")]
    TooLarge { dim: usize, limit: usize },

    #[error("matrix is not symmetric: |A[{row},{col}] - A[{col},{row}]| = {gap:e}")]
    InvalidMatrix { row: usize, col: usize, gap: f64 },

    #[error("kernel table: {0}")]
    Table(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be positive and finite, got {value}")))
    }
}
