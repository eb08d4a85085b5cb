//! Optional TOML configuration merged beneath explicit flags.
//!
//! Precedence is strict: command-line flag > config-file value > built-in
//! default. Every key is optional; unknown keys are rejected so a typo
//! fails loudly instead of silently falling back to a default.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    /// Lexer profile: builtin name or path to a profile TOML.
    pub profile: Option<String>,
    /// Scoring back end: "ngram", "mlm", or "remote".
    pub scorer: Option<String>,
    /// Trained n-gram model path.
    pub model: Option<PathBuf>,
    /// Micro-MLM checkpoint path.
    pub mlm: Option<PathBuf>,
    /// Flagging sensitivity (threshold sits at mu - k*sigma).
    pub k: Option<f64>,
    /// Context-window token budget.
    pub max_len: Option<usize>,
    /// Top-k cutoffs for repair accuracy.
    pub topk: Option<Vec<usize>>,
    pub seed: Option<u64>,
    /// Parallel worker count.
    pub jobs: Option<usize>,
    /// Default output directory for dataset/chart-producing commands.
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub runner: RunnerSection,
    #[serde(default)]
    pub remote: RemoteSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunnerSection {
    /// Command template executing a program; `{src}` expands to its path.
    pub command: Option<String>,
    /// Parse/compile gate run before any test.
    pub check_command: Option<String>,
    /// Per-invocation wall-clock budget in seconds.
    pub timeout_secs: Option<f64>,
    /// Captured output truncation limit.
    pub max_output_bytes: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteSection {
    pub base_url: Option<String>,
    pub model_name: Option<String>,
    /// Environment variable holding the API key.
    pub api_key_env: Option<String>,
    pub timeout_secs: Option<f64>,
    pub max_retries: Option<u32>,
    pub backoff_base_secs: Option<f64>,
    pub max_in_flight: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    /// No path given → every field takes its built-in default.
    pub fn load_opt(path: Option<&Path>) -> Result<Self, CliError> {
        path.map(Self::load).unwrap_or_else(|| Ok(Self::default()))
    }
}
