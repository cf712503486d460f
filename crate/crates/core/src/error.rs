use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Required keys missing or invalid; every problem found is listed.
    #[error("schema error: {}", .0.join("; "))]
    Schema(Vec<String>),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("unknown attribute path `{path}` (valid top-level names: {valid})")]
    Lookup { path: String, valid: String },

    #[error("empty distribution: total weight is zero")]
    EmptyDistribution,

    #[error("index {index} out of range for {len} items")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid weight {weight} at index {index}")]
    InvalidWeight { index: usize, weight: f64 },

    #[error("unknown behavior point `{name}` (valid points: {valid})")]
    UnknownBehavior { name: String, valid: String },

    #[error("state error: {0}")]
    State(String),

    #[error("internal consistency fault in quarter {quarter}: {identity} (residual {residual:e}, scale {scale:e})")]
    Identity {
        identity: &'static str,
        quarter: u32,
        residual: f64,
        scale: f64,
    },

    #[error("run {run}: {source}")]
    Run {
        run: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
