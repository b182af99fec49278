use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("incompatible models: {0}")]
    Incompatible(String),

    #[error("format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error("cannot stratify: {0}")]
    Stratification(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("csv error: {0}")]
    Csv(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn format(offset: usize, message: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Capacity(_) => 2,
            Error::Format { .. }
            | Error::Csv(_)
            | Error::Stratification(_)
            | Error::EmptyDataset(_)
            | Error::Io { .. } => 3,
            _ => 4,
        }
    }
}
