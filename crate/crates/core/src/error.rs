use thiserror::Error;

/// Errors produced by the simulator and its front end.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates its owning type's invariants.
    #[error("invalid configuration `{key}`: {message}")]
    Config { key: String, message: String },

    /// A numerical procedure failed to converge or produced a non-finite value.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Mixture-fraction estimation could not be carried out on the given curve.
    #[error("estimation failure: {0}")]
    Estimation(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
