//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A response value fell strictly inside the removed band (a, b).
    #[error("response {value} lies strictly inside the excluded band ({a}, {b})")]
    MiddleBand { value: f64, a: f64, b: f64 },

    /// A (group, class) cell required by stratification is empty.
    #[error("group {group} has no observations of class {class}")]
    EmptyCell { group: String, class: u8 },

    /// Bad numerical input tied to a specific feature.
    #[error("feature {index}: {message}")]
    Feature { index: usize, message: String },

    /// Invalid configuration or arguments.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Data file parsing problems, with location when known.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// Linear algebra failure that jitter could not rescue.
    #[error("singular system: {0}")]
    Singular(String),

    /// Dataset generation could not satisfy its size requirements.
    #[error("{0}")]
    Generation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn parse(path: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: msg.into(),
        }
    }
}
