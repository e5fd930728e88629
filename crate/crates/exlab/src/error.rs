use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("format error at line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("certification impossible: {0}")]
    CertificationImpossible(String),
    #[error("search budget exhausted before any candidate was evaluated")]
    SearchExhausted,
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("inconsistent stream at step {step}: b != M(a,x) for a={a}")]
    InconsistentStream { step: usize, a: usize },
    #[error("leaf label kind mismatch: {0}")]
    LabelKindMismatch(String),
    #[error("width overflow: {0}")]
    WidthOverflow(String),
    #[error("invalid budget: {0}")]
    InvalidBudget(String),
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("target vertex not reached by the truncated path")]
    UnreachedTarget,
    #[error("parameter mismatch: {0}")]
    ParamMismatch(String),
    #[error("empty subset")]
    EmptySubset,
    #[error("function is identically zero")]
    ZeroFunction,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
