use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("incompatible feature vectors at index {index}")]
    Incompatible { index: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("schema error at line {line}: {message}")]
    Schema { line: usize, message: String },

    #[error("unknown provider {0}")]
    UnknownProvider(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Data errors (malformed inputs) as opposed to configuration mistakes.
    pub fn is_data_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Schema { .. } | Error::Io(_))
    }
}
