use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The stored spectrum is too short for the requested evaluation
    /// (either a compact mask reaches past the cap, or a certified tail
    /// bound cannot be brought below the requested tolerance).
    #[error("spectrum exhausted: {0}")]
    SpectrumExhausted(String),

    #[error("rejected eigendata: {0}")]
    RejectedEigendata(String),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
