use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FwmError {
    #[error("label ({0}, {1}, {2}) lies outside the cone C3")]
    InvalidLabel(i64, i64, i64),
    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("numerical instability: {0}")]
    NumericalInstability(String),
    #[error("frequency resonance condition violated: omega0 - omega1 + omega2 - omega3 = {0:e}")]
    NotResonant(f64),
    #[error("truncation T = {0} exceeds supported bound {1}")]
    TruncationTooLarge(u32, u32),
    #[error("state lies on the boundary of Omega4 (|z_{0}| = 0), angles undefined")]
    OnBoundary(usize),
    #[error("I0 = {i0} outside the open interval ]{a}, {b}[")]
    OutOfInterval { i0: f64, a: f64, b: f64 },
    #[error("division by zero in {0}")]
    DivisionByZero(&'static str),
    #[error("coupling g = 0: closed forms undefined, use the linear rotation")]
    ZeroCoupling,
    #[error("operator dimension {got} does not match sector dimension {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("G0 vanishes on the integration grid at t = {0}")]
    SingularPoint(f64),
    #[error("eigensolver did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("sign pattern (p = {p:e}, Delta = {delta:e}) not covered by the closed forms")]
    UnsupportedRegime { p: f64, delta: f64 },
}

pub type Result<T> = std::result::Result<T, FwmError>;
