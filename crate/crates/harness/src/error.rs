use thiserror::Error;
use varfilt_core::filters::FilterKind;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] varfilt_core::Error),

    #[error("{kind} filter failed at step {step}: {source}")]
    Step {
        kind: FilterKind,
        step: usize,
        #[source]
        source: varfilt_core::Error,
    },

    #[error("dim {dim}, filter {kind}, problem {problem}: {source}")]
    Cell {
        dim: usize,
        kind: FilterKind,
        problem: usize,
        #[source]
        source: Box<HarnessError>,
    },

    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, HarnessError>;
