use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter is outside its domain (non-positive temperature, ...).
    #[error("parameter out of domain: {0}")]
    Domain(String),

    /// Malformed configuration: empty or non-monotone tables, bad config keys.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Nonvacuum probability mass too large for the truncated joint table.
    #[error("low-intensity approximation violated at p[{n_st}][{n_ast}] = {value:.6e}: {reason}")]
    LowIntensity {
        n_st: usize,
        n_ast: usize,
        value: f64,
        reason: &'static str,
    },

    #[error("unsupported correlator order ({m_st}, {m_ast}): {reason}")]
    UnsupportedOrder {
        m_st: usize,
        m_ast: usize,
        reason: &'static str,
    },

    /// Herald direction incompatible with the detection order of the correlation set.
    #[error("{herald} heralding needs {needed} detection order, correlation set has {actual}")]
    HeraldOrder {
        herald: &'static str,
        needed: &'static str,
        actual: &'static str,
    },

    /// An asymptotic formula was requested outside the regime where it holds.
    #[error("limit regime {regime} not valid here: {reason}")]
    Regime { regime: &'static str, reason: String },

    /// Requested scenario cannot be built from the given inputs.
    #[error("scenario not supported: {0}")]
    Scenario(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit status used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Io { .. } => 4,
            _ => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
