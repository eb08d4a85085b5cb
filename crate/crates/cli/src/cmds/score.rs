//! `lecforge score` — raw per-token log-probabilities, no flagging.

use std::path::PathBuf;

use clap::Args;
use lecforge_core::localizer::score_program;
use lecforge_core::tokenizer::tokenize;
use serde_json::json;

use super::{emit, read_source, resolve_profile};
use crate::config::FileConfig;
use crate::scorers::ScorerOpts;
use crate::CliError;

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Source files to score.
    #[arg(value_name = "FILE", required = true)]
    pub files: Vec<PathBuf>,

    #[command(flatten)]
    pub scorer: ScorerOpts,

    #[arg(long)]
    pub profile: Option<String>,
}

pub fn run(args: ScoreArgs, file: &FileConfig) -> Result<i32, CliError> {
    let profile = resolve_profile(&args.profile, file)?;
    let scorer = args.scorer.build(file, &profile)?;
    for path in &args.files {
        let source = read_source(path)?;
        let stream = tokenize(&source, &profile);
        let scored = score_program(scorer.as_ref(), &stream)?;
        emit(&json!({
            "kind": "file",
            "path": path.to_string_lossy(),
            "tokens": stream.len(),
        }))?;
        let mut sum = 0.0;
        let mut scored_count = 0usize;
        for (i, tok) in stream.tokens().iter().enumerate() {
            let logprob = if scored.unscored[i] {
                None
            } else {
                sum += scored.logprobs[i];
                scored_count += 1;
                Some(scored.logprobs[i])
            };
            emit(&json!({
                "kind": "token",
                "index": i,
                "text": tok.text,
                "token_kind": tok.kind,
                "line": tok.line,
                "logprob": logprob,
            }))?;
        }
        let mean = if scored_count > 0 {
            sum / scored_count as f64
        } else {
            0.0
        };
        emit(&json!({
            "kind": "file_summary",
            "path": path.to_string_lossy(),
            "scored": scored_count,
            "mean_logprob": mean,
        }))?;
    }
    Ok(0)
}
