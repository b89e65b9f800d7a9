use thiserror::Error as ThisError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, ThisError)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] starspec_core::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot parse config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed dump line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    /// Errors caused by the caller's input rather than by the computation.
    pub fn is_input_error(&self) -> bool {
        use starspec_core::Error as C;
        match self {
            Error::Core(e) => matches!(
                e,
                C::Geometry(_) | C::Meshing(_) | C::Incompatible(_) | C::InvalidInput(_)
            ),
            Error::Config(_) | Error::Toml(_) | Error::Parse { .. } => true,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => false,
        }
    }
}

pub(crate) fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
