use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: aclab_core::Error,
    },
    #[error("{0}")]
    Sweep(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, LabError>;

/// Attach context to a core failure.
pub(crate) trait Context<T> {
    fn context(self, what: &str) -> Result<T>;
}

impl<T> Context<T> for aclab_core::Result<T> {
    fn context(self, what: &str) -> Result<T> {
        self.map_err(|source| LabError::Numerical { context: what.to_string(), source })
    }
}
