use thiserror::Error;

/// Errors raised across the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// A point or parameter lies outside the admissible domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent discretization data (level mismatch, non-nested knots, ...).
    #[error("structural error: {0}")]
    Structural(String),

    /// Refinement requested beyond the deepest level of the hierarchy.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A state vector or matrix was built against another space generation.
    #[error("stale data: built for generation {found}, space is at generation {expected}")]
    Stale { expected: u64, found: u64 },

    #[error("numerical failure: {message} (relative residual {residual:.3e})")]
    Numerical { message: String, residual: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_generation(expected: u64, found: u64) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Stale { expected, found })
    }
}
