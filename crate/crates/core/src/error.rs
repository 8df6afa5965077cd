use thiserror::Error;

/// Errors produced by the solver and analysis layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Non-finite coefficients appeared during time stepping.
    #[error("numerical blowup at t = {time}")]
    Blowup { time: f64 },

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("aliasing: {0}")]
    Aliasing(String),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("pole placement: {0}")]
    PolePlacement(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
