//! Error type shared across the toolkit.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input file. `row` is the 1-based data row (header excluded),
    /// `column` is the header name when one exists, otherwise the 0-based index.
    #[error("parse error in {path} at row {row}, column {column}: {message}")]
    Parse {
        path: String,
        row: usize,
        column: String,
        message: String,
    },

    #[error("{path}: no samples")]
    EmptyDataset { path: String },

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: String },

    #[error("labels have {got} entries but the dataset has {expected} rows")]
    LabelLength { got: usize, expected: usize },

    #[error("correlation requires at least 2 samples, got {0}")]
    TooFewSamples(usize),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("party {0} owns no features")]
    EmptyParty(usize),

    #[error("assignment has {got} entries but the dataset has {expected} features")]
    AssignmentLength { got: usize, expected: usize },

    #[error("party counts {counts:?} do not sum to feature count {total}")]
    CountMismatch { counts: Vec<usize>, total: usize },

    #[error("singular value iteration did not converge after {iterations} iterations")]
    SvdNoConvergence { iterations: usize },

    #[error("relative error is undefined: exact value is zero")]
    ZeroExactValue,

    #[error("characteristic function failed on party subset {subset:?}: {message}")]
    CharacteristicFn { subset: Vec<usize>, message: String },

    #[error("party importance is zero everywhere; cannot normalize")]
    AllZeroImportance,

    #[error("importance variance is degenerate ({0}); symmetric alpha is undefined")]
    DegenerateVariance(f64),

    #[error("icor range {range:.3e} is below 1e-9; beta is indeterminate")]
    FlatIcorLandscape { range: f64 },

    #[error(
        "image layout {channels}x{height}x{width} describes {expected} features, dataset has {got}"
    )]
    LayoutMismatch {
        channels: usize,
        height: usize,
        width: usize,
        expected: usize,
        got: usize,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by unreadable or malformed input files, as
    /// opposed to invalid parameters or failed numeric preconditions.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. } | Error::Parse { .. } | Error::EmptyDataset { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
