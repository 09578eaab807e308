use thiserror::Error;

/// Errors raised anywhere in the detection pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape mismatch: expected length {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("scale index {index} out of range 1..={levels}")]
    ScaleIndex { index: usize, levels: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no location available")]
    NoLocation,

    #[error("speed unavailable: {0}")]
    NoSpeed(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("corrupt file: {malformed} of {total} data rows malformed")]
    Corrupt { malformed: usize, total: usize },

    #[error("timestamps out of order at line {line}: {t} ms after {prev} ms")]
    Ordering { line: usize, t: i64, prev: i64 },

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("segment {index}: {source}")]
    AtSegment {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
