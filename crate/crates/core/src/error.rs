use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unknown space `{0}`")]
    UnknownSpace(String),
    #[error("invalid weight sequence: {0}")]
    InvalidWeights(String),
    #[error("index {index} beyond materialized range 0..={n_max}")]
    IndexOutOfRange { index: usize, n_max: usize },
    #[error("series has vanishing constant term; reciprocal does not exist")]
    Singular,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("matrix dimension {n} exceeds configured maximum {max}")]
    TooLarge { n: usize, max: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
