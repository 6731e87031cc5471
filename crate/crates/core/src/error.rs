use std::path::PathBuf;

use crate::diversity::Metric;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("missing or unreadable file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed manifest {path}: {source}")]
    Manifest {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("malformed row in {path} (line {line}): {reason}")]
    MalformedRow {
        path: PathBuf,
        line: u64,
        reason: String,
    },

    #[error("probability normalization: row for sample {sample_id} in {path} sums to {sum}")]
    Normalization {
        path: PathBuf,
        sample_id: String,
        sum: f64,
    },

    #[error("sample coverage mismatch: sample {sample_id} {detail}")]
    Coverage { sample_id: String, detail: String },

    #[error("unknown class label {label:?} for sample {sample_id}")]
    UnknownClass { sample_id: String, label: String },

    #[error("invalid pool: {0}")]
    InvalidPool(String),

    #[error("model id {id} out of range for a pool of {models} models")]
    UnknownModel { id: usize, models: usize },

    #[error("unknown sample id {0:?}")]
    UnknownSample(String),

    #[error("invalid team: {0}")]
    InvalidTeam(String),

    #[error("invalid team size bounds: min {min}, max {max}, pool of {models}")]
    SizeBounds {
        min: usize,
        max: usize,
        models: usize,
    },

    #[error("undefined diversity for {metric}: empty evaluation subset")]
    UndefinedDiversity { metric: Metric },

    #[error("focal model {focal} has no negative samples")]
    FocalWithoutNegatives { focal: usize },

    #[error("negative sample set was built for a different mode than required")]
    NegativeModeMismatch,

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("invalid synthetic pool spec: {0}")]
    InvalidSpec(String),

    #[error("scoring team {team} with {metric}: {source}")]
    TeamScoring {
        team: String,
        metric: Metric,
        #[source]
        source: Box<Error>,
    },
}
