use thiserror::Error;

/// Errors raised across the library.
///
/// The variants follow the failure classes of the operations: bad parameters,
/// out-of-range indices, failed validation of an input, numerical breakdown,
/// and infeasible optimization problems.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HiveError {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("numerical error: {what} (after {iterations} iterations, residual {residual:e})")]
    Numerical {
        what: String,
        iterations: usize,
        residual: f64,
    },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("statistics error: {0}")]
    Statistics(String),

    #[error("geometry error: {0}")]
    Geometry(String),
}

impl HiveError {
    /// True for errors caused by caller-supplied configuration rather than by
    /// the numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, HiveError::Parameter(_) | HiveError::Precondition(_))
    }
}

pub type Result<T> = std::result::Result<T, HiveError>;
