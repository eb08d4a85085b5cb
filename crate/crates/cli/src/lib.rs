//! `lecforge` — command-line front end for the localize/repair/inject/eval
//! toolkit in `lecforge-core`.
//!
//! Exit codes partition cleanly: 0 success, 1 domain failure (bad data, a
//! failed subprocess, an unreadable model), 2 usage error (bad flags or a
//! malformed config file). `run-mini` additionally returns 3 when an
//! explicit step budget is exhausted.
//!
//! Reports are line-delimited JSON records on stdout, one object per line,
//! each carrying a `"kind"` discriminator; charts are SVG text files. Every
//! subcommand is deterministic for fixed inputs and `--seed`, so repeated
//! invocations produce byte-identical artifacts (the remote scorer excepted,
//! unless pointed at a scripted stub).

pub mod chart;
pub mod cmds;
pub mod config;
pub mod scorers;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use lecforge_core::CoreError;

/// User-facing failures, partitioned by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, invalid parameter values, malformed config → exit 2.
    Usage(String),
    /// A well-formed request that failed against real data → exit 1.
    Domain(String),
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match err {
            // Core config errors mean a parameter was out of range or two
            // artifacts were mispaired — the caller's request was wrong.
            CoreError::Config { .. } => CliError::Usage(err.to_string()),
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        CliError::Domain(format!("serialization: {err}"))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "lecforge",
    version,
    about = "Statistical localization, repair, injection, and evaluation of logical errors in small programs"
)]
pub struct Cli {
    /// TOML config file; explicit flags take precedence over its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: cmds::Command,
}

/// Parse `argv` and dispatch; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            // clap prints help/version to stdout (exit 0) and genuine
            // usage errors, synopsis included, to stderr (exit 2).
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    match cmds::execute(cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            eprintln!("run `lecforge help <subcommand>` for the synopsis");
            2
        }
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn help_exits_zero() {
        assert_eq!(run(["lecforge", "--help"]), 0);
    }

    #[test]
    fn unknown_subcommand_is_a_usage_error() {
        assert_eq!(run(["lecforge", "frobnicate"]), 2);
    }

    #[test]
    fn missing_required_flag_is_a_usage_error() {
        // train-ngram demands --out.
        assert_eq!(run(["lecforge", "train-ngram", "some-root"]), 2);
    }

    #[test]
    fn core_config_errors_map_to_usage() {
        let err = CoreError::config("order", "must be >= 1");
        assert!(matches!(CliError::from(err), CliError::Usage(_)));
    }

    #[test]
    fn core_io_errors_map_to_domain() {
        let err = CoreError::EmptyCorpus;
        assert!(matches!(CliError::from(err), CliError::Domain(_)));
    }
}
