use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("empty population")]
    EmptyPopulation,

    #[error("no common items")]
    NoCommonItems,

    #[error("unknown item `{0}`")]
    UnknownItem(String),

    #[error("subset has zero total weight")]
    ZeroWeight,

    /// An assumed or derived parameter lies outside the range in which the
    /// reasoning is meaningful.
    #[error("infeasible parameter: {name} = {value} is outside [{lower}, {upper}]")]
    Infeasible {
        name: &'static str,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("variant {variant} inapplicable: {reason}")]
    VariantInapplicable { variant: u8, reason: String },

    #[error("noop change: no item is affected")]
    NoopChange,

    #[error("zero diff: base and exp are identical")]
    ZeroDiff,

    #[error("snapshot equals PerfectPrecision")]
    SnapshotIsPerfectPrecision,

    #[error("PerfectRecall reference refused; it carries little information (override required)")]
    PerfectRecallRefused,

    #[error("empty sample")]
    EmptySample,

    #[error("pair ({0}, {1}) has no judgement")]
    Unjudged(String, String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("correlation undefined: {0}")]
    CorrelationUndefined(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
