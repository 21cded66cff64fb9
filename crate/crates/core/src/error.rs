use std::path::PathBuf;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{what} = {value} is outside its domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("config {path}: {message}")]
    ConfigParse { path: String, message: String },

    #[error("arm {arm} has not been pulled yet")]
    UnpulledArm { arm: usize },

    #[error("inconsistent K_inf result: {0}")]
    InconsistentResult(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(what: &'static str, value: f64, expected: &'static str) -> Error {
    Error::Domain {
        what,
        value,
        expected,
    }
}
