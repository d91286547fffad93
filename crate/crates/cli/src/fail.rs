//! Single-line, machine-parsable errors.

use std::fmt;
use std::path::Path;

use cellgraph::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new("config", message)
    }

    pub fn missing(message: impl Into<String>) -> Self {
        Self::new("missing-input", message)
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::new("io", format!("{}: {e}", path.display()))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match &e {
            Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => "missing-input",
            Error::Io { .. } => "io",
            Error::Header { .. }
            | Error::UnsupportedVersion { .. }
            | Error::SizeMismatch { .. }
            | Error::ChecksumMismatch { .. }
            | Error::Json(_) => "format",
            Error::MissingSpecimen(_) => "missing-input",
            Error::UnknownBlock(_) => "config",
            _ => "invalid",
        };
        Self::new(kind, e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::new("format", e.to_string())
    }
}

impl fmt::Display for CliError {
    /// `error: kind=<kind> message="<escaped message>"`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut msg = String::with_capacity(self.message.len());
        for c in self.message.chars() {
            match c {
                '"' => msg.push_str("\\\""),
                '\\' => msg.push_str("\\\\"),
                '\n' => msg.push_str("\\n"),
                '\r' => {}
                c => msg.push(c),
            }
        }
        write!(f, "error: kind={} message=\"{msg}\"", self.kind)
    }
}
