use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("singular interface system at iteration {iteration}: {detail}")]
    SingularInterface { iteration: usize, detail: String },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("parse error at {location}: {detail}")]
    Parse { location: String, detail: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
