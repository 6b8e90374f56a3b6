use thiserror::Error;

/// Errors raised by the spectral and filtering building blocks.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum DspError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite value at bin {bin}")]
    NonFinite { bin: usize },
}

/// Errors raised by the streaming engine.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("hop has {got} samples, expected {expected}")]
    HopLength { expected: usize, got: usize },
    /// The hop contained NaN or infinite samples. It was processed as silence and, if
    /// `emitted` is set, the output buffer holds a valid hop.
    #[error("non-finite input samples in hop {hop}; hop processed as silence")]
    NonFiniteInput { hop: u64, emitted: bool },
    #[error("oracle estimator requires a clean reference stream")]
    MissingReference,
    #[error(transparent)]
    Dsp(#[from] DspError),
}

pub type Result<T, E = DspError> = std::result::Result<T, E>;
