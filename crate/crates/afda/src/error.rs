use std::path::{Path, PathBuf};

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] afda_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        source: image::ImageError,
    },
    /// Malformed manifest, config or raster contents.
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn format(path: &Path, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }

    /// Stable machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Core(afda_core::Error::InSample { .. }) => "sample",
            Error::Core(_) => "validation",
            Error::Io { .. } => "io",
            Error::Image { .. } => "decode",
            Error::Format { .. } => "format",
            Error::Invalid(_) => "invalid",
        }
    }

    pub fn path(&self) -> Option<&Path> {
        match self {
            Error::Io { path, .. } | Error::Image { path, .. } | Error::Format { path, .. } => Some(path),
            _ => None,
        }
    }
}

/// One failure as written to manifests and to stderr by the CLI.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct ErrorRecord {
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl From<&Error> for ErrorRecord {
    fn from(e: &Error) -> Self {
        ErrorRecord {
            error: e.kind().to_string(),
            message: e.to_string(),
            path: e.path().map(|p| p.display().to_string()),
        }
    }
}
