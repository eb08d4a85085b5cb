//! Subcommand surface and shared plumbing.

pub mod ablate;
pub mod eval;
pub mod ingest;
pub mod inject;
pub mod localize;
pub mod plot;
pub mod repair;
pub mod run_mini;
pub mod score;
pub mod train_mlm;
pub mod train_ngram;

use std::path::Path;

use clap::Subcommand;
use lecforge_core::localizer::DEFAULT_K;
use lecforge_core::profile::{load_profile, LexProfile};
use lecforge_core::repairer::DEFAULT_MAX_LEN;
use serde::Serialize;

use crate::config::FileConfig;
use crate::{Cli, CliError};

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Walk source roots, apply the corpus filter, and report what survives.
    Ingest(ingest::IngestArgs),
    /// Train the count-based n-gram scorer and write it to disk.
    TrainNgram(train_ngram::TrainNgramArgs),
    /// Train the micro masked language model (fine-tune or prompt-tune).
    TrainMlm(train_mlm::TrainMlmArgs),
    /// Per-token log-probabilities for one or more source files.
    Score(score::ScoreArgs),
    /// Flag statistically suspicious tokens and lines.
    Localize(localize::LocalizeArgs),
    /// Mask suspicious tokens and fill them back in, left to right.
    Repair(repair::RepairArgs),
    /// Breed logical-error variants from correct, tested programs.
    Inject(inject::InjectArgs),
    /// Run localize+repair over a generated dataset and aggregate metrics.
    Eval(eval::EvalArgs),
    /// Sweep prompt init, placement, length, and mask rate on the micro-MLM.
    Ablate(ablate::AblateArgs),
    /// Re-render SVG charts from a saved localize report.
    Plot(plot::PlotArgs),
    /// Interpret a program in the bundled mini language.
    RunMini(run_mini::RunMiniArgs),
}

pub fn execute(cli: Cli) -> Result<i32, CliError> {
    let file = FileConfig::load_opt(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest(args) => ingest::run(args, &file),
        Command::TrainNgram(args) => train_ngram::run(args, &file),
        Command::TrainMlm(args) => train_mlm::run(args, &file),
        Command::Score(args) => score::run(args, &file),
        Command::Localize(args) => localize::run(args, &file),
        Command::Repair(args) => repair::run(args, &file),
        Command::Inject(args) => inject::run(args, &file),
        Command::Eval(args) => eval::run(args, &file),
        Command::Ablate(args) => ablate::run(args, &file),
        Command::Plot(args) => plot::run(args, &file),
        Command::RunMini(args) => run_mini::run(args),
    }
}

/// Emit one line-delimited JSON record on stdout.
pub(crate) fn emit<T: Serialize>(record: &T) -> Result<(), CliError> {
    println!("{}", serde_json::to_string(record)?);
    Ok(())
}

/// Serialize `value` and tag the resulting object with a `"kind"` field.
pub(crate) fn tagged<T: Serialize>(kind: &str, value: &T) -> Result<serde_json::Value, CliError> {
    let mut v = serde_json::to_value(value)?;
    if let serde_json::Value::Object(map) = &mut v {
        map.insert("kind".into(), serde_json::Value::String(kind.into()));
    }
    Ok(v)
}

pub(crate) fn read_source(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Domain(format!("write {}: {e}", path.display())))
}

pub(crate) fn resolve_profile(
    flag: &Option<String>,
    file: &FileConfig,
) -> Result<LexProfile, CliError> {
    let name = flag
        .clone()
        .or_else(|| file.profile.clone())
        .unwrap_or_else(|| "python-like".to_string());
    Ok(load_profile(&name)?)
}

pub(crate) fn resolve_k(flag: Option<f64>, file: &FileConfig) -> Result<f64, CliError> {
    let k = flag.or(file.k).unwrap_or(DEFAULT_K);
    if !k.is_finite() || k < 0.0 {
        return Err(CliError::Usage(format!(
            "--k must be finite and non-negative, got {k}"
        )));
    }
    Ok(k)
}

pub(crate) fn resolve_max_len(flag: Option<usize>, file: &FileConfig) -> Result<usize, CliError> {
    let max_len = flag.or(file.max_len).unwrap_or(DEFAULT_MAX_LEN);
    if max_len < 3 {
        return Err(CliError::Usage(format!(
            "--max-len must be at least 3, got {max_len}"
        )));
    }
    Ok(max_len)
}

pub(crate) fn resolve_seed(flag: Option<u64>, file: &FileConfig) -> u64 {
    flag.or(file.seed).unwrap_or(0)
}

pub(crate) fn resolve_jobs(flag: Option<usize>, file: &FileConfig) -> Result<usize, CliError> {
    let jobs = flag.or(file.jobs).unwrap_or_else(default_jobs);
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    Ok(jobs)
}

pub(crate) fn default_jobs() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}
