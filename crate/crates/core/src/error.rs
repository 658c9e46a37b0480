use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("operands live in different ring contexts")]
    ContextMismatch,
    #[error("ghost vector is not integral: division by p^{0} is not exact")]
    NonIntegralGhost(u32),
    #[error("frobenius needs a Witt vector of length at least 1")]
    LengthUnderflow,
    #[error("index {0} is outside the support of the weight function")]
    IndexOutsideSupport(usize),
    #[error("coefficient out of range for modulus p^{0}")]
    CoefficientOutOfRange(u32),
    #[error("model result is not integral: {0}")]
    NonIntegralResult(String),
    #[error("form is not in the integral de Rham-Witt image: {0}")]
    NonIntegralExtraction(String),
    #[error("extraction system is singular")]
    SingularSystem,
    #[error("exponent denominator exceeds the cap p^{0}")]
    ExponentCapExceeded(u32),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("unknown inequality {0:?}")]
    UnknownInequality(String),
    #[error("malformed multiplication table: {0}")]
    MalformedTable(String),
    #[error("presentation is not relatively perfect: {0}")]
    NotRelativelyPerfect(String),
    #[error("element needs generators beyond weight bound {0}")]
    WeightBoundExceeded(u64),
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
