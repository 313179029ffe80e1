use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid large parameter Λ = {0}: Re Λ must exceed 1/2")]
    InvalidLambda(Complex64),
    #[error("invalid anchor: {0}")]
    InvalidAnchor(String),
    #[error("point {0} is not on the integration segment")]
    OffSegment(Complex64),
    #[error("anchor ordering violated: {0}")]
    AnchorOrder(String),
    #[error("problem kind mismatch: {0}")]
    KindMismatch(String),
    #[error("pole of the Gamma function at {0}")]
    Pole(Complex64),
    #[error("series or iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("result overflows the floating-point range")]
    Overflow,
    #[error("quadrature accuracy check failed: relative disagreement {0:e}")]
    Accuracy(f64),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("expansion result has not converged")]
    NotConverged,
    #[error("coefficient backend mismatch: {0}")]
    BackendMismatch(String),
    #[error("minus-branch partial sum is undefined at the origin")]
    OriginError,
    #[error("initial-data matching system is singular (|det| = {0:e})")]
    SingularMatch(f64),
}
