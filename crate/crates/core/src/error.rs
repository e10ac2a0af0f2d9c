use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is singular or not positive definite: {0}")]
    Singular(String),

    #[error("low-rank budget exceeded: {requested} terms requested, at most {max} allowed")]
    Capacity { requested: usize, max: usize },

    #[error("gamma {gamma:e} is infeasible (corrected precision loses definiteness at {bound:e})")]
    Infeasible { gamma: f64, bound: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
