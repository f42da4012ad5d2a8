use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown persona `{0}`")]
    UnknownPersona(String),

    #[error("unknown stressor `{0}`")]
    UnknownStressor(String),

    #[error("invalid action code {0} (expected 0..=6)")]
    InvalidAction(i64),

    #[error("action {0:?} is disabled by the active ablation")]
    MaskedAction(crate::env::Action),

    #[error("episode already finished; call reset first")]
    EpisodeFinished,

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("non-finite value during training: {0}")]
    NonFinite(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("observation shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error(transparent)]
    Vignette(#[from] crate::vignette::VignetteError),

    #[error("manifest mismatch: {0}")]
    Manifest(String),

    #[error("{0}")]
    Usage(String),

    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 for usage/config problems, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::UnknownPersona(_)
            | Error::UnknownStressor(_)
            | Error::Usage(_)
            | Error::Json(_) => 1,
            _ => 2,
        }
    }
}
