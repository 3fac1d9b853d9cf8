use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integrator step too coarse: gamma*dt = {0:.3e} exceeds 0.01")]
    StepTooCoarse(f64),

    #[error("estimator input: {0}")]
    Estimator(String),

    #[error("least-squares design matrix is rank deficient")]
    RankDeficient,

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("record line {line}: {message}")]
    RecordFormat { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
