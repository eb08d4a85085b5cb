//! `lecforge repair` — mask suspicious tokens and fill them back in.
//!
//! Mask sites come from one of three places, in precedence order: explicit
//! `--mask-at` indices, a saved localize report via `--mask-from`, or a
//! fresh localization pass with the same scorer (`--k` applies). Filling is
//! autoregressive left-to-right: each mask is replaced by the top-ranked
//! candidate before the next is scored.

use std::path::{Path, PathBuf};

use clap::Args;
use lecforge_core::localizer::localize;
use lecforge_core::repairer::{mask_tokens, repair_autoregressive};
use lecforge_core::tokenizer::{detokenize, tokenize};
use serde_json::json;

use super::{emit, read_source, resolve_k, resolve_max_len, resolve_profile, write_text};
use crate::config::FileConfig;
use crate::scorers::ScorerOpts;
use crate::CliError;

#[derive(Debug, Args)]
pub struct RepairArgs {
    /// Source file to repair.
    #[arg(value_name = "FILE")]
    pub file: PathBuf,

    #[command(flatten)]
    pub scorer: ScorerOpts,

    /// Candidates recorded per mask in the report.
    #[arg(long, default_value_t = 10)]
    pub k_keep: usize,

    /// Context-window token budget per fill (mask included).
    #[arg(long)]
    pub max_len: Option<usize>,

    /// Read mask sites from a saved localize report (JSONL).
    #[arg(long, value_name = "REPORT")]
    pub mask_from: Option<PathBuf>,

    /// Mask these token indices explicitly (comma-separated).
    #[arg(long, value_name = "I,J,...", value_delimiter = ',')]
    pub mask_at: Vec<usize>,

    /// Localization sensitivity when mask sites are not given explicitly.
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,

    #[arg(long)]
    pub profile: Option<String>,

    /// Also write the repaired source to this file.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

/// Pull flagged token indices back out of a saved localize report.
fn masks_from_report(path: &Path) -> Result<Vec<usize>, CliError> {
    let text = read_source(path)?;
    let mut indices = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(line)
            .map_err(|e| CliError::Domain(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        if value["kind"] == "token" && value["status"] == "flagged" {
            let index = value["index"].as_u64().ok_or_else(|| {
                CliError::Domain(format!(
                    "{}:{}: flagged token record lacks an index",
                    path.display(),
                    lineno + 1
                ))
            })?;
            indices.push(index as usize);
        }
    }
    Ok(indices)
}

pub fn run(args: RepairArgs, file: &FileConfig) -> Result<i32, CliError> {
    if args.k_keep == 0 {
        return Err(CliError::Usage("--k-keep must be at least 1".into()));
    }
    if !args.mask_at.is_empty() && args.mask_from.is_some() {
        return Err(CliError::Usage(
            "--mask-at and --mask-from are mutually exclusive".into(),
        ));
    }
    let profile = resolve_profile(&args.profile, file)?;
    let max_len = resolve_max_len(args.max_len, file)?;
    let scorer = args.scorer.build(file, &profile)?;
    let source = read_source(&args.file)?;
    let stream = tokenize(&source, &profile);

    let indices = if !args.mask_at.is_empty() {
        args.mask_at.clone()
    } else if let Some(report) = &args.mask_from {
        masks_from_report(report)?
    } else {
        let k = resolve_k(args.k, file)?;
        localize(scorer.as_ref(), &stream, k, &profile)?.flagged_token_indices
    };

    if indices.is_empty() {
        // Nothing to mask: the program is emitted unchanged.
        emit(&json!({"kind": "repaired", "source": source}))?;
        emit(&json!({"kind": "summary", "masks": 0, "changed": 0}))?;
        if let Some(out) = &args.out {
            write_text(out, &source)?;
        }
        return Ok(0);
    }

    let masked = mask_tokens(&stream, &indices)?;
    let result = repair_autoregressive(scorer.as_ref(), &masked, args.k_keep, max_len)?;
    let repaired = detokenize(&result.repaired_stream);

    let mut changed = 0usize;
    for (m, &position) in masked.mask_positions.iter().enumerate() {
        let old = &masked.origin[m].1;
        let chosen = &result.filled_choices[m];
        if chosen != old {
            changed += 1;
        }
        emit(&json!({
            "kind": "fill",
            "position": position,
            "old": old,
            "chosen": chosen,
            "window": result.window_spans[m],
            "candidates": result.per_mask_candidates[m],
        }))?;
    }
    emit(&json!({"kind": "repaired", "source": repaired}))?;
    emit(&json!({
        "kind": "summary",
        "masks": masked.mask_positions.len(),
        "changed": changed,
    }))?;
    if let Some(out) = &args.out {
        write_text(out, &repaired)?;
    }
    Ok(0)
}
