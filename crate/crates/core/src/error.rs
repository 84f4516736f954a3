use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid box ({x_min}, {y_min}, {x_max}, {y_max}): corners out of order or not finite")]
    InvalidBox {
        x_min: f64,
        y_min: f64,
        x_max: f64,
        y_max: f64,
    },

    #[error("normalized coordinate {name} = {value} is outside [0, 1]")]
    NormalizedOutOfRange { name: &'static str, value: f64 },

    #[error("image dimensions must be positive, got {width}x{height}")]
    EmptyImage { width: u32, height: u32 },

    #[error("could not place {requested} shapes on a {width}x{height} canvas after {attempts} attempts")]
    PlacementFailed {
        requested: usize,
        width: u32,
        height: u32,
        attempts: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("variance needs at least 2 pixels, got {0}")]
    TooFewPixels(usize),

    #[error("no crops for the {0} branch")]
    EmptyBranch(&'static str),

    #[error("variance bin {bin} of the {branch} branch is empty and smoothing is disabled")]
    EmptyBin { branch: &'static str, bin: usize },

    #[error("crop box is empty after clipping: {0}")]
    EmptyCrop(String),

    #[error("unsupported model version {0}")]
    ModelVersion(u32),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn image(path: impl Into<PathBuf>, source: image::ImageError) -> Self {
        Error::Image {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// True when the error came from a missing or unreadable file.
    pub fn is_unreadable_path(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::Image { source, .. } => matches!(source, image::ImageError::IoError(_)),
            _ => false,
        }
    }
}
