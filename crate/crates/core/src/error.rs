use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Value outside the accepted domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    /// Cell lies in the 60..63 minute/second padding of the extended space.
    #[error("padding cell {0} lies outside geographic space")]
    PaddingCell(String),

    #[error("coverage cap exceeded: estimated {estimate} candidate cells, cap is {cap}; use a coarser level")]
    CoverageCapExceeded { cap: u64, estimate: u64 },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid timestamp {field}: {message}")]
    Timestamp {
        field: &'static str,
        message: String,
    },

    #[error("malformed key segment {segment}: {message}")]
    Key { segment: usize, message: String },

    #[error("duplicate primary key {0}")]
    DuplicateKey(String),

    #[error("malformed record: {0}")]
    Record(String),

    #[error("line {line}: {message}")]
    Load { line: usize, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
