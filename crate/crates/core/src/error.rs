use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate span: input vectors are linearly dependent")]
    DegenerateSpan,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid highest weight {weight:?} for SO({n}): {reason}")]
    InvalidWeight {
        n: usize,
        weight: Vec<i64>,
        reason: String,
    },

    #[error("degenerate element: eigen-angle gap below tolerance")]
    DegenerateElement,

    #[error("weight absent from source Grassmannian")]
    WeightAbsentFromSource,

    #[error("all projections negligible")]
    AllProjectionsNegligible,

    #[error("zero-volume probe body")]
    ZeroVolumeProbe,

    #[error("incomparable cuspidal lines")]
    IncomparableLines,

    #[error("segments are not linked")]
    NotLinked,

    #[error("precedence hypothesis fails")]
    PrecedenceFails,

    #[error("multisegment identity failed: {0}")]
    MultisegmentIdentity(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
