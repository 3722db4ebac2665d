use thiserror::Error;

use crate::transforms::TransformRecord;

pub type Result<T> = std::result::Result<T, QbnError>;

#[derive(Debug, Error)]
pub enum QbnError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("malformed parent instantiation: {0}")]
    MalformedInstantiation(String),

    #[error("malformed sample: {0}")]
    MalformedSample(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("summary undefined for beta({alpha}, {omega}): alpha + omega must be positive")]
    UndefinedSummary { alpha: f64, omega: f64 },

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("invalid beta statistic: {0}")]
    InvalidStat(String),

    #[error("structure error: {0}")]
    Structure(String),

    #[error("directed cycle: {0}")]
    Cycle(String),

    #[error("query parse error at `{token}`: {msg}")]
    QueryParse { token: String, msg: String },

    #[error("invalid query: {0}")]
    Query(String),

    #[error("joint table of {cells} cells exceeds the {limit} cell limit")]
    Capacity { cells: u128, limit: u128 },

    #[error("plan aborted at step {step}: {source}")]
    AbortedPlan {
        step: usize,
        #[source]
        source: Box<QbnError>,
        trace: Vec<TransformRecord>,
    },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
