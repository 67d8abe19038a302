use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("interaction is not Hermitian (relative defect {0:e})")]
    NonHermitian(f64),

    #[error("propagation failed at step {step}: non-finite state (last valid snapshot {last_valid})")]
    Propagation { step: usize, last_valid: usize },

    #[error("negative occupation {value:e} at step {step}; use a finer time grid")]
    StepSize { step: usize, value: f64 },

    #[error("generator has no steady state (smallest singular value {0:e})")]
    NoSteadyState(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),
}
