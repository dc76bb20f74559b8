use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value in forward evaluation")]
    NonFinite,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("yield gradient undefined on the hydrostatic axis (J = {0:e})")]
    DegenerateState(f64),
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),
    #[error("Newton solve did not converge after {iters} iterations (residual {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },
    #[error("negative plastic multiplier {0:e}")]
    NegativeMultiplier(f64),
    #[error("singular Newton system")]
    SingularSystem,
    #[error("strain {eps:e} at increment {step} lies outside data branch {branch}")]
    PathOutsideData { step: usize, branch: usize, eps: f64 },
    #[error("parse error at line {line}: {msg}")]
    ParseError { line: usize, msg: String },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("non-finite value at row {0}")]
    NonFiniteValue(usize),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
