use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed document: {0}")]
    Parse(String),

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("criterion `{criterion}`: m out of range ({m} indicators, expected 1..=5)")]
    IndicatorCount { criterion: String, m: usize },

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("missing weight entry for criterion `{0}`")]
    MissingWeight(String),

    #[error("criterion `{0}` has no AHP weight yet (marked derive-from-ratings)")]
    PendingWeight(String),

    #[error("invalid ratings: {0}")]
    Ratings(String),

    #[error("unknown stakeholder group `{requested}` (available: {})", available.join(", "))]
    UnknownGroup {
        requested: String,
        available: Vec<String>,
    },

    #[error("criterion `{0}` missing from ratings")]
    MissingCriterion(String),

    #[error("invalid pairwise matrix: {0}")]
    Matrix(String),

    #[error("power iteration did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error("consistency ratio undefined for {0} criteria (random index table covers 1..=10)")]
    RandomIndexExhausted(usize),

    #[error("m out of range: {0} (expected 2..=5)")]
    WeightDomain(usize),

    #[error("invalid sampler config: {0}")]
    SamplerConfig(String),

    #[error("invalid sampling interval [{low}, {high}]")]
    Interval { low: f64, high: f64 },

    #[error("criterion `{criterion}`: row {row} exceeded {cap} redraws without meeting min weight")]
    RedrawCapExceeded {
        criterion: String,
        row: usize,
        cap: usize,
    },

    #[error("invalid value function for `{indicator}`: {reason}")]
    ValueFunction { indicator: String, reason: String },

    #[error("unknown shape code `{0}`")]
    UnknownShape(String),

    #[error("indicator `{indicator}`: score {x} outside [{x_min}, {x_max}]")]
    OutOfDomain {
        indicator: String,
        x: f64,
        x_min: f64,
        x_max: f64,
    },

    #[error("missing scenario `{scenario}` for indicator `{indicator}`")]
    MissingScenario { indicator: String, scenario: String },

    #[error("indicator `{0}` has no entry in the value table")]
    MissingIndicator(String),

    #[error("length mismatch: {0}")]
    Length(String),

    #[error("weight matrix layout does not match tree: {0}")]
    Layout(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("invalid chart request: {0}")]
    ChartRequest(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors that come from the filesystem rather than the data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
