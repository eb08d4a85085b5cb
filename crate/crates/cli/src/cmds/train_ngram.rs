//! `lecforge train-ngram` — fit the count model and write it to disk.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use lecforge_core::corpus::{ingest_corpus, CorpusFilter};
use lecforge_core::ngram::{train_ngram, NGramConfig, Smoothing};
use serde_json::json;

use super::{emit, resolve_profile};
use crate::config::FileConfig;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SmoothingChoice {
    /// Witten-Bell interpolated discounting (recommended).
    WittenBell,
    /// Raw maximum likelihood with constant-factor backoff.
    None,
}

impl From<SmoothingChoice> for Smoothing {
    fn from(choice: SmoothingChoice) -> Self {
        match choice {
            SmoothingChoice::WittenBell => Smoothing::WittenBell,
            SmoothingChoice::None => Smoothing::None,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainNgramArgs {
    /// Source roots (files or directories) to train on.
    #[arg(value_name = "ROOT", required = true)]
    pub roots: Vec<PathBuf>,

    /// Model order: each token is conditioned on order-1 predecessors.
    #[arg(long, default_value_t = 4)]
    pub order: usize,

    #[arg(long, value_enum, default_value_t = SmoothingChoice::WittenBell)]
    pub smoothing: SmoothingChoice,

    /// Tokens with corpus frequency below this are mapped to <unk>.
    #[arg(long, default_value_t = 1)]
    pub unk_threshold: u32,

    /// Output model path.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,

    #[arg(long)]
    pub profile: Option<String>,
}

pub fn run(args: TrainNgramArgs, file: &FileConfig) -> Result<i32, CliError> {
    let profile = resolve_profile(&args.profile, file)?;
    let corpus = ingest_corpus(&args.roots, &CorpusFilter::default(), &profile)?;
    let config = NGramConfig {
        order: args.order,
        smoothing: args.smoothing.into(),
        unk_threshold: args.unk_threshold,
    };
    let model = train_ngram(&corpus, config)?;
    model.save(&args.out)?;
    emit(&json!({
        "kind": "summary",
        "files": corpus.accepted_count(),
        "rejected": corpus.rejected_count(),
        "tokens": corpus.total_tokens(),
        "vocab": model.vocab().len(),
        "order": args.order,
        "out": args.out.to_string_lossy(),
    }))?;
    Ok(0)
}
