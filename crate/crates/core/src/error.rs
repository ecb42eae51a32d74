use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported representation: {0}")]
    UnsupportedRepresentation(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("loop not closed up to vertical segments: {0}")]
    NotClosed(String),
    #[error("not simple: {0}")]
    NotSimple(String),
    #[error("truncation exceeded: {0}")]
    TruncationExceeded(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("translate loop above axis for MC")]
    BelowAxis,
    #[error("input is not a Stratonovich transport: {0}")]
    NotStratonovich(String),
}

impl Error {
    /// True for errors caused by size limits rather than bad input.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource(_))
    }
}
