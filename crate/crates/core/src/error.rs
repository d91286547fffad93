use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header {path}: {message}")]
    Header { path: PathBuf, message: String },

    #[error("unsupported format version {found} (expected {expected})")]
    UnsupportedVersion { found: String, expected: u32 },

    #[error("size mismatch for {what}: expected {expected}, found {found}")]
    SizeMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("checksum mismatch for {what}")]
    ChecksumMismatch { what: String },

    #[error("invalid spacing {0:?}: components must be finite and > 0")]
    InvalidSpacing([f64; 3]),

    #[error("invalid class id {0} (allowed 0..={1})")]
    InvalidClass(u8, u8),

    #[error("unknown cell id {0}")]
    UnknownCell(u32),

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("no cell touches the background")]
    NoSurface,

    #[error("missing tissue {0} required by the frame method")]
    MissingTissue(&'static str),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("unknown feature block {0}")]
    UnknownBlock(String),

    #[error("missing specimen {0}")]
    MissingSpecimen(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn header(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Header {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Short machine-readable tag, used by the command-line error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Header { .. } => "header",
            Error::UnsupportedVersion { .. } => "version",
            Error::SizeMismatch { .. } => "size_mismatch",
            Error::ChecksumMismatch { .. } => "checksum",
            Error::InvalidSpacing(_) => "spacing",
            Error::InvalidClass(..) => "class",
            Error::UnknownCell(_) => "unknown_cell",
            Error::Disconnected { .. } => "disconnected",
            Error::NoSurface => "no_surface",
            Error::MissingTissue(_) => "missing_tissue",
            Error::Degenerate(_) => "degenerate",
            Error::Shape(_) => "shape",
            Error::UnknownBlock(_) => "unknown_block",
            Error::MissingSpecimen(_) => "missing_specimen",
            Error::Invalid(_) => "invalid",
            Error::Json(_) => "json",
        }
    }
}
