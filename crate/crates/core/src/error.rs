use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Library error. Every variant maps onto a stable machine-readable category
/// that the command-line front end prints as `error:<category>:`.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Validation(String),

    #[error("size limit: {0}")]
    Size(String),

    #[error("unknown class(es): {}", .0.join(", "))]
    UnknownClass(Vec<String>),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Config(String),
}

impl Error {
    pub fn category(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::EmptyInput(_) => "empty-input",
            Error::InsufficientData(_) => "insufficient-data",
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::Size(_) => "size",
            Error::UnknownClass(_) => "unknown-class",
            Error::Convergence { .. } => "convergence",
            Error::Io { .. } => "io",
            Error::Config(_) => "config",
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
