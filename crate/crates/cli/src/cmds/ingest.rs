//! `lecforge ingest` — walk roots, filter, and report the surviving corpus.

use std::path::PathBuf;

use clap::Args;
use lecforge_core::corpus::{ingest_corpus, CorpusFilter};
use serde_json::json;

use super::{emit, resolve_profile};
use crate::config::FileConfig;
use crate::CliError;

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Source roots (files or directories) to walk.
    #[arg(value_name = "ROOT", required = true)]
    pub roots: Vec<PathBuf>,

    /// Lexer profile: a builtin name (python-like, java-like, mini) or a
    /// path to a profile TOML.
    #[arg(long)]
    pub profile: Option<String>,
}

pub fn run(args: IngestArgs, file: &FileConfig) -> Result<i32, CliError> {
    let profile = resolve_profile(&args.profile, file)?;
    let corpus = ingest_corpus(&args.roots, &CorpusFilter::default(), &profile)?;
    for f in &corpus.files {
        emit(&json!({
            "kind": "file",
            "path": f.path.to_string_lossy(),
            "tokens": f.stream.len(),
        }))?;
    }
    for (path, reason) in &corpus.rejected {
        emit(&json!({
            "kind": "rejected",
            "path": path.to_string_lossy(),
            "reason": reason,
        }))?;
    }
    emit(&json!({
        "kind": "summary",
        "accepted": corpus.accepted_count(),
        "rejected": corpus.rejected_count(),
        "total_tokens": corpus.total_tokens(),
    }))?;
    Ok(0)
}
