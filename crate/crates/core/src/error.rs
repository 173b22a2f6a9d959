use thiserror::Error;

/// Errors produced by the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid room: {0}")]
    InvalidRoom(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible trajectory: {0}")]
    InfeasibleTrajectory(String),

    #[error("singular normal equations in filter design: {0}")]
    SingularDesign(String),

    #[error("total delay {total} is below the filter latency {nominal}")]
    DelayUnderflow { total: f64, nominal: f64 },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("job needs {needed} distance evaluations, budget is {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },

    #[error("reference signal has zero energy")]
    ZeroReference,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("wav: {0}")]
    Wav(#[from] hound::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
