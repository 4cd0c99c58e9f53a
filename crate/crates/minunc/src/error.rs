use thiserror::Error;

/// Failure modes shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("operator not hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    /// The truncated basis holds too little of the requested state.
    #[error("truncated basis captures {captured:.15} of the state, need at least {required:.15}")]
    TruncationCapture { captured: f64, required: f64 },

    #[error("unphysical parameters: {0}")]
    Unphysical(String),

    #[error("ill conditioned: {0}")]
    IllConditioned(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
