use std::path::PathBuf;

pub type Result<T, E = GeeError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum GeeError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// A value outside the domain an operation accepts (bad ids, size mismatch).
    #[error("domain error: {0}")]
    Domain(String),

    /// Inputs are individually valid but cannot be used together.
    #[error("configuration error: {0}")]
    Config(String),

    /// A generator or model specification that cannot produce a valid graph.
    #[error("model specification error: {0}")]
    Spec(String),

    /// A numeric routine failed at runtime.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl GeeError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GeeError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 for runtime failures, 2 for usage or validation.
    pub fn exit_code(&self) -> i32 {
        match self {
            GeeError::Numeric(_) => 1,
            _ => 2,
        }
    }
}
