//! `lecforge localize` — flag statistically suspicious tokens and lines.
//!
//! The report is line-delimited JSON: two `stats` records (token and line
//! level), one `token` record per lexed token, one `line` record per scored
//! line, one `excluded_line` record per definition/import line, and a final
//! `summary`. With `--charts DIR` the same data is also rendered as two SVG
//! bar charts — one bar per non-newline token and one per scored line, blue
//! for flagged, pale grey for excluded.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::Args;
use lecforge_core::localizer::{localize_scored, line_perplexities, score_program};
use lecforge_core::tokenizer::{tokenize, TokenKind};
use serde_json::json;

use super::{emit, read_source, resolve_k, resolve_profile, write_text};
use crate::chart::{render_barchart, BarKind};
use crate::config::FileConfig;
use crate::scorers::ScorerOpts;
use crate::CliError;

#[derive(Debug, Args)]
pub struct LocalizeArgs {
    /// Source file to examine.
    #[arg(value_name = "FILE")]
    pub file: PathBuf,

    #[command(flatten)]
    pub scorer: ScorerOpts,

    /// Flagging sensitivity: thresholds sit at mu - k*sigma.
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,

    #[arg(long)]
    pub profile: Option<String>,

    /// Directory to write token/line SVG charts into.
    #[arg(long, value_name = "DIR")]
    pub charts: Option<PathBuf>,
}

/// Everything the two charts need, assembled identically by `localize`
/// (from live data) and `plot` (from a saved report).
pub(crate) struct ChartInputs {
    pub token_values: Vec<f64>,
    pub token_labels: Vec<String>,
    pub token_kinds: Vec<BarKind>,
    pub line_values: Vec<f64>,
    pub line_labels: Vec<String>,
    pub line_kinds: Vec<BarKind>,
}

pub(crate) fn write_charts(
    dir: &Path,
    stem: &str,
    inputs: &ChartInputs,
    title_prefix: &str,
) -> Result<(PathBuf, PathBuf), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Domain(format!("create {}: {e}", dir.display())))?;
    let tokens_svg = render_barchart(
        &inputs.token_values,
        &inputs.token_labels,
        &inputs.token_kinds,
        &format!("{title_prefix}: token log-probabilities"),
    )?;
    let tokens_path = dir.join(format!("{stem}.tokens.svg"));
    write_text(&tokens_path, &tokens_svg)?;
    let lines_svg = render_barchart(
        &inputs.line_values,
        &inputs.line_labels,
        &inputs.line_kinds,
        &format!("{title_prefix}: line mean log-probabilities"),
    )?;
    let lines_path = dir.join(format!("{stem}.lines.svg"));
    write_text(&lines_path, &lines_svg)?;
    Ok((tokens_path, lines_path))
}

pub fn run(args: LocalizeArgs, file: &FileConfig) -> Result<i32, CliError> {
    let profile = resolve_profile(&args.profile, file)?;
    let k = resolve_k(args.k, file)?;
    let scorer = args.scorer.build(file, &profile)?;
    let source = read_source(&args.file)?;
    let stream = tokenize(&source, &profile);
    let scored = score_program(scorer.as_ref(), &stream)?;
    let report = localize_scored(&scored, k, &profile)?;
    let lines = line_perplexities(&scored);

    let flagged_tokens: BTreeSet<usize> = report.flagged_token_indices.iter().copied().collect();
    let flagged_lines: BTreeSet<usize> = report.flagged_line_indices.iter().copied().collect();
    let excluded_lines: BTreeSet<usize> = report.excluded_lines.iter().map(|e| e.line).collect();

    for (level, stats) in [("token", &report.stats_token), ("line", &report.stats_line)] {
        emit(&json!({
            "kind": "stats",
            "level": level,
            "mu": stats.mu,
            "sigma": stats.sigma,
            "k": stats.k,
            "tau": stats.tau,
        }))?;
    }

    let mut inputs = ChartInputs {
        token_values: Vec::new(),
        token_labels: Vec::new(),
        token_kinds: Vec::new(),
        line_values: Vec::new(),
        line_labels: Vec::new(),
        line_kinds: Vec::new(),
    };

    for (i, tok) in stream.tokens().iter().enumerate() {
        let status = if flagged_tokens.contains(&i) {
            "flagged"
        } else if scored.unscored[i] || excluded_lines.contains(&tok.line) {
            "excluded"
        } else {
            "normal"
        };
        let logprob = if scored.unscored[i] {
            None
        } else {
            Some(scored.logprobs[i])
        };
        emit(&json!({
            "kind": "token",
            "index": i,
            "text": tok.text,
            "token_kind": tok.kind,
            "line": tok.line,
            "logprob": logprob,
            "status": status,
        }))?;
        if tok.kind != TokenKind::Newline {
            inputs.token_values.push(logprob.unwrap_or(0.0));
            inputs.token_labels.push(tok.text.clone());
            inputs.token_kinds.push(bar_kind(status));
        }
    }

    for ls in &lines {
        let status = if flagged_lines.contains(&ls.line_index) {
            "flagged"
        } else if excluded_lines.contains(&ls.line_index) {
            "excluded"
        } else {
            "normal"
        };
        emit(&json!({
            "kind": "line",
            "line": ls.line_index,
            "ppl": ls.ppl,
            "mean_logprob": ls.mean_logprob,
            "status": status,
        }))?;
        inputs.line_values.push(ls.mean_logprob);
        inputs.line_labels.push(format!("L{}", ls.line_index));
        inputs.line_kinds.push(bar_kind(status));
    }

    for e in &report.excluded_lines {
        emit(&json!({
            "kind": "excluded_line",
            "line": e.line,
            "reason": e.reason,
        }))?;
    }

    emit(&json!({
        "kind": "summary",
        "path": args.file.to_string_lossy(),
        "k": k,
        "flagged_tokens": report.flagged_token_indices,
        "flagged_lines": report.flagged_line_indices,
    }))?;

    if let Some(dir) = &args.charts {
        let stem = args
            .file
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "program".to_string());
        write_charts(dir, &stem, &inputs, &stem)?;
    }
    Ok(0)
}

pub(crate) fn bar_kind(status: &str) -> BarKind {
    match status {
        "flagged" => BarKind::Flagged,
        "excluded" => BarKind::Excluded,
        _ => BarKind::Normal,
    }
}
