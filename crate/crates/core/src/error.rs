use thiserror::Error;

/// Errors raised by sequence construction, validation and analysis.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("phase list must have even length, got {0}")]
    OddLength(usize),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("pulse sequence is empty")]
    EmptySequence,

    #[error("pulse {index} has negative rotation angle {theta}")]
    NegativeAngle { index: usize, theta: f64 },

    #[error("sequence does not close onto Z({target_phi}): fidelity {fidelity} at zero error")]
    NotClosed { target_phi: f64, fidelity: f64 },

    #[error("unsupported request: {0}")]
    Unsupported(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("out of domain: {0}")]
    Domain(String),

    #[error("infidelity stays below {threshold:e} along the whole axis; sequence is exact there")]
    DegenerateFlat { threshold: f64 },

    #[error("invalid sequence JSON: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;
