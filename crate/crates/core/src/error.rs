use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed csv")]
    Csv(#[from] csv::Error),

    #[error("{0} is empty")]
    EmptyInput(String),

    #[error("row {row}, column '{column}': cannot parse '{value}' as a finite number")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("label column '{0}' not found in header")]
    MissingLabelColumn(String),

    #[error("no numeric attributes left after removing the label column")]
    NoAttributes,

    #[error("bin count must be positive (attribute {attribute})")]
    NonPositiveBins { attribute: usize },

    #[error("expected {expected} per-attribute bin counts, got {found}")]
    BinsLengthMismatch { expected: usize, found: usize },

    #[error("grid line {line}: cuts are not strictly increasing")]
    NonMonotoneCuts { line: usize },

    #[error("grid line {line}: {message}")]
    BadGridLine { line: usize, message: String },

    #[error("grid has {found} attributes, dataset has {expected}")]
    AttributeCountMismatch { expected: usize, found: usize },

    #[error("object {object}, attribute {attribute}: value {value} lies outside the grid range [{lo}, {hi}]")]
    OutOfGrid {
        object: usize,
        attribute: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("universal integer code is undefined for {0} (requires n >= 1)")]
    NonPositiveInteger(u64),

    #[error("pseudo-count must be positive and finite, got {0}")]
    BadEpsilon(f64),

    #[error("usage multiset is empty")]
    EmptyUsages,

    #[error("pattern set is empty")]
    EmptyPatternSet,

    #[error("pattern covers do not partition the object set: {0}")]
    NotAPartition(String),

    #[error("pattern index {0} is not in the pattern set")]
    UnknownPattern(usize),

    #[error("cannot merge a pattern with itself (index {0})")]
    SelfMerge(usize),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("unknown synthetic layout '{0}'")]
    UnknownLayout(String),

    #[error("support must be at least 1")]
    ZeroSupport,

    #[error("labels are required for every object")]
    MissingLabels,

    #[error("{0}")]
    Invalid(String),

    #[error("malformed json")]
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
