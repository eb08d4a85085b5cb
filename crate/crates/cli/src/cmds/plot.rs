//! `lecforge plot` — re-render SVG charts from a saved localize report.
//!
//! Reads the line-delimited records `localize` prints (redirect stdout to a
//! file to save one) and rebuilds the same token and line bar charts, no
//! scorer required.

use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use super::localize::{bar_kind, write_charts, ChartInputs};
use super::{emit, read_source};
use crate::config::FileConfig;
use crate::CliError;

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// A saved localize report (JSONL).
    #[arg(value_name = "REPORT")]
    pub report: PathBuf,

    /// Directory to write the charts into.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Basename for the emitted SVG files (default: the report's stem).
    #[arg(long)]
    pub stem: Option<String>,

    /// Chart title prefix (default: the stem).
    #[arg(long)]
    pub title: Option<String>,
}

pub fn run(args: PlotArgs, file: &FileConfig) -> Result<i32, CliError> {
    let out = args
        .out
        .clone()
        .or_else(|| file.out_dir.clone())
        .ok_or_else(|| CliError::Usage("--out is required (chart directory)".into()))?;
    let text = read_source(&args.report)?;

    let mut inputs = ChartInputs {
        token_values: Vec::new(),
        token_labels: Vec::new(),
        token_kinds: Vec::new(),
        line_values: Vec::new(),
        line_labels: Vec::new(),
        line_kinds: Vec::new(),
    };
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(line).map_err(|e| {
            CliError::Domain(format!("{}:{}: {e}", args.report.display(), lineno + 1))
        })?;
        let status = value["status"].as_str().unwrap_or("normal");
        match value["kind"].as_str() {
            Some("token") => {
                // Newline tokens carry no chartable content; localize skips
                // them when charting, so plot must too.
                if value["token_kind"] == "newline" {
                    continue;
                }
                let Some(label) = value["text"].as_str() else {
                    continue;
                };
                inputs.token_values.push(value["logprob"].as_f64().unwrap_or(0.0));
                inputs.token_labels.push(label.to_string());
                inputs.token_kinds.push(bar_kind(status));
            }
            Some("line") => {
                let Some(index) = value["line"].as_u64() else {
                    continue;
                };
                inputs
                    .line_values
                    .push(value["mean_logprob"].as_f64().unwrap_or(0.0));
                inputs.line_labels.push(format!("L{index}"));
                inputs.line_kinds.push(bar_kind(status));
            }
            _ => {}
        }
    }

    let stem = args.stem.clone().unwrap_or_else(|| {
        args.report
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "report".to_string())
    });
    let title = args.title.clone().unwrap_or_else(|| stem.clone());
    let (tokens_path, lines_path) = write_charts(&out, &stem, &inputs, &title)?;
    emit(&json!({
        "kind": "summary",
        "tokens_chart": tokens_path.to_string_lossy(),
        "lines_chart": lines_path.to_string_lossy(),
        "token_bars": inputs.token_values.len(),
        "line_bars": inputs.line_values.len(),
    }))?;
    Ok(0)
}
