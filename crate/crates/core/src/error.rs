use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not a proper rotation (tolerance {tol:e})")]
    InvalidRotation { tol: f64 },

    #[error("matrix is not skew-symmetric (asymmetry {asymmetry:e})")]
    NotSkew { asymmetry: f64 },

    #[error("quaternion norm deviates from one by {deviation:e}")]
    NotUnit { deviation: f64 },

    #[error("singular input: {0}")]
    Singular(String),

    #[error("value is not in canonical form: {0}")]
    NonCanonical(String),

    #[error("operation `{op}` does not support {what}")]
    Unsupported { op: &'static str, what: String },

    #[error("zero-length operand")]
    ZeroLength,

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
