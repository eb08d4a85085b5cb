use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CoreError>;

/// Error type shared by every module in this crate.
///
/// Variants are grouped by failure class so callers (and the CLI) can map
/// them onto exit codes without string matching: configuration and
/// precondition failures are caller bugs, the rest are runtime conditions.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A knob, profile field, or config file entry has an invalid value.
    #[error("config error ({field}): {message}")]
    Config { field: String, message: String },

    /// An API contract was violated by the caller.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    /// Every candidate file was rejected by the corpus filter.
    #[error("no files passed the corpus filter")]
    EmptyCorpus,

    /// A model file is truncated, corrupt, or from a different format.
    #[error("persistence error at {field}: {message}")]
    Persistence {
        field: &'static str,
        message: String,
    },

    /// A scoring backend failed while working on a specific token position.
    #[error("scorer failed at position {position}: {message}")]
    Scorer { position: usize, message: String },

    /// A remote request ran out of retries.
    #[error("remote request failed after {attempts} attempt(s): {message}")]
    Remote { attempts: u32, message: String },

    /// The remote response is syntactically valid but missing required fields.
    #[error("remote protocol error: missing or malformed field `{0}`")]
    Protocol(&'static str),

    /// Echoed subword spans could not be matched against the source text.
    #[error("span alignment failed; unmatched byte spans: {0:?}")]
    Alignment(Vec<(usize, usize)>),

    /// Training produced a non-finite loss.
    #[error("training diverged at step {step}: {message}")]
    Training { step: usize, message: String },

    /// The external runner itself is broken (as opposed to the program under test).
    #[error("runner misconfigured: {0}")]
    Runner(String),
}

impl CoreError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CoreError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CoreError::Io {
            path: path.into(),
            source,
        }
    }
}
