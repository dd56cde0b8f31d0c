use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix {index} is not symmetric at ({row}, {col}): difference {diff:e}")]
    Asymmetric {
        index: usize,
        row: usize,
        col: usize,
        diff: f64,
    },
    #[error("ragged input: {0}")]
    Ragged(String),
    #[error("malformed entry: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("point lies outside the spectrahedron: minimum eigenvalue {0:e}")]
    Outside(f64),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("pencil is unbounded along {0:?}")]
    Unbounded(Vec<f64>),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("decomposition did not finish within {0} splits")]
    Decomposition(usize),
    #[error("dilation failed: {0}")]
    DilationFailed(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
