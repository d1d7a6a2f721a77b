use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("point {0} lies outside the carrier")]
    OutOfCarrier(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("parameter constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("invalid map: {0}")]
    InvalidPam(String),
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("not a rational literal at {line}:{col}: {text}")]
    NonRationalLiteral { line: usize, col: usize, text: String },
    #[error("no invariant carrier found: {0}")]
    NotSelfMap(String),
    #[error("i/o failure: {0}")]
    Io(String),
    #[error("guard {0} lies outside the carrier")]
    GuardOutsideCarrier(String),
}

pub type Result<T> = std::result::Result<T, Error>;
