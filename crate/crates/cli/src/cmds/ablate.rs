//! `lecforge ablate` — sweep the micro-MLM's prompt-tuning knobs.
//!
//! Four tables come out, one JSON record per row: prompt initialization
//! (4 rows), prompt placement (4 rows), prompt length 0–100 in steps of 10
//! (11 rows), and mask percentage 5%–95% (10 rows). Values are reported,
//! not judged — the point is the shape of the sweep, not any threshold.

use std::path::PathBuf;

use clap::Args;
use lecforge_core::corpus::{ingest_corpus, CorpusFilter};
use lecforge_core::mlm::train::{ablate, AblateConfig};
use lecforge_core::vocab::Vocab;
use serde_json::json;

use super::{emit, resolve_profile, resolve_seed};
use crate::cmds::train_mlm::corpus_sequences;
use crate::config::FileConfig;
use crate::CliError;

/// Longest prompt in the length sweep; the text window must leave room
/// for it plus at least two text rows.
const MAX_SWEEP_PROMPT: usize = 100;

#[derive(Debug, Args)]
pub struct AblateArgs {
    /// Source roots (files or directories) to train on.
    #[arg(value_name = "ROOT", required = true)]
    pub roots: Vec<PathBuf>,

    #[arg(long, default_value_t = 30)]
    pub steps: usize,

    #[arg(long, default_value_t = 4)]
    pub batch_size: usize,

    #[arg(long, default_value_t = 5e-3)]
    pub lr: f64,

    /// Embedding width.
    #[arg(long, default_value_t = 16)]
    pub d: usize,

    /// Maximum sequence rows (soft prompt + text window).
    #[arg(long)]
    pub max_len: Option<usize>,

    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long)]
    pub profile: Option<String>,
}

pub fn run(args: AblateArgs, file: &FileConfig) -> Result<i32, CliError> {
    let profile = resolve_profile(&args.profile, file)?;
    let max_len = args.max_len.or(file.max_len).unwrap_or(128);
    if max_len < MAX_SWEEP_PROMPT + 2 {
        return Err(CliError::Usage(format!(
            "--max-len must be at least {} to fit the longest swept prompt, got {max_len}",
            MAX_SWEEP_PROMPT + 2
        )));
    }
    let corpus = ingest_corpus(&args.roots, &CorpusFilter::default(), &profile)?;
    let vocab = Vocab::from_corpus(&corpus);
    let sequences = corpus_sequences(&corpus, &vocab, max_len - MAX_SWEEP_PROMPT);
    if sequences.is_empty() {
        return Err(CliError::Domain(
            "corpus yields no training window of at least two tokens".into(),
        ));
    }

    let cfg = AblateConfig {
        vocab: vocab.len(),
        d: args.d,
        max_len,
        steps: args.steps,
        batch_size: args.batch_size,
        learning_rate: args.lr,
        seed: resolve_seed(args.seed, file),
    };
    let report = ablate(&sequences, &cfg)?;

    let tables: [(&str, &[_]); 4] = [
        ("init", report.init_rows.as_slice()),
        ("placement", report.placement_rows.as_slice()),
        ("length", report.length_rows.as_slice()),
        ("mask", report.mask_rows.as_slice()),
    ];
    let mut rows = 0usize;
    for (table, table_rows) in tables {
        for row in table_rows {
            emit(&json!({
                "kind": "ablation",
                "table": table,
                "label": row.label,
                "accuracy": row.accuracy,
            }))?;
            rows += 1;
        }
    }
    emit(&json!({
        "kind": "summary",
        "rows": rows,
        "sequences": sequences.len(),
        "vocab": vocab.len(),
    }))?;
    Ok(0)
}
