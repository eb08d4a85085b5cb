//! `lecforge eval` — run localize+repair over a generated dataset and
//! aggregate the metrics.
//!
//! The dataset layout is the one `inject` writes. Each variant yields one
//! `record` line (localization recall/precision, top-k repair accuracy,
//! full-repair bit, CodeBLEU against the correct source, error classes);
//! the final `summary` line aggregates across all variants.

use std::path::{Path, PathBuf};

use clap::Args;
use lecforge_core::evaluator::{aggregate, evaluate_variant};
use lecforge_core::injector::InjectionVariant;
use lecforge_core::profile::load_profile;
use serde_json::json;

use super::{emit, read_source, resolve_k, resolve_max_len, tagged};
use crate::config::FileConfig;
use crate::scorers::ScorerOpts;
use crate::CliError;

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Dataset directory produced by `inject`.
    #[arg(long, value_name = "DIR")]
    pub dataset: PathBuf,

    #[command(flatten)]
    pub scorer: ScorerOpts,

    /// Flagging sensitivity.
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,

    /// Top-k cutoffs for repair accuracy (comma-separated).
    #[arg(long, value_name = "K,K,...", value_delimiter = ',')]
    pub topk: Vec<usize>,

    #[arg(long)]
    pub max_len: Option<usize>,
}

pub(crate) struct DatasetCase {
    pub name: String,
    pub profile_name: String,
    pub correct: String,
    pub variants: Vec<InjectionVariant>,
}

pub(crate) fn read_dataset(root: &Path) -> Result<Vec<DatasetCase>, CliError> {
    let entries = std::fs::read_dir(root)
        .map_err(|e| CliError::Domain(format!("dataset {}: {e}", root.display())))?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir() && p.join("case.json").is_file())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(CliError::Domain(format!(
            "no dataset cases under {}",
            root.display()
        )));
    }

    let mut cases = Vec::with_capacity(dirs.len());
    for dir in dirs {
        let meta: serde_json::Value = serde_json::from_str(&read_source(&dir.join("case.json"))?)
            .map_err(|e| CliError::Domain(format!("{}/case.json: {e}", dir.display())))?;
        let name = meta["name"]
            .as_str()
            .ok_or_else(|| CliError::Domain(format!("{}/case.json: missing name", dir.display())))?
            .to_string();
        let profile_name = meta["profile"]
            .as_str()
            .ok_or_else(|| {
                CliError::Domain(format!("{}/case.json: missing profile", dir.display()))
            })?
            .to_string();
        let correct = read_source(&dir.join("correct.txt"))?;

        let mut variants = Vec::new();
        let vroot = dir.join("variants");
        if vroot.is_dir() {
            let mut vdirs: Vec<PathBuf> = std::fs::read_dir(&vroot)
                .map_err(|e| CliError::Domain(format!("{}: {e}", vroot.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_dir())
                .collect();
            vdirs.sort();
            for vdir in vdirs {
                let truth = read_source(&vdir.join("truth.json"))?;
                let variant: InjectionVariant = serde_json::from_str(&truth).map_err(|e| {
                    CliError::Domain(format!("{}/truth.json: {e}", vdir.display()))
                })?;
                variants.push(variant);
            }
        }
        cases.push(DatasetCase {
            name,
            profile_name,
            correct,
            variants,
        });
    }
    Ok(cases)
}

pub fn run(args: EvalArgs, file: &FileConfig) -> Result<i32, CliError> {
    let k = resolve_k(args.k, file)?;
    let max_len = resolve_max_len(args.max_len, file)?;
    let mut ks = if args.topk.is_empty() {
        file.topk.clone().unwrap_or_else(|| vec![1, 5, 10])
    } else {
        args.topk.clone()
    };
    if ks.iter().any(|&k| k == 0) {
        return Err(CliError::Usage("--topk cutoffs must be at least 1".into()));
    }
    ks.sort_unstable();
    ks.dedup();

    let cases = read_dataset(&args.dataset)?;
    let profile0 = load_profile(&cases[0].profile_name)?;
    let scorer = args.scorer.build(file, &profile0)?;

    let mut records = Vec::new();
    for case in &cases {
        let profile = load_profile(&case.profile_name)?;
        for variant in &case.variants {
            let record =
                evaluate_variant(scorer.as_ref(), variant, &case.correct, k, &ks, max_len, &profile)?;
            emit(&tagged("record", &record)?)?;
            records.push(record);
        }
        emit(&json!({
            "kind": "case",
            "name": case.name,
            "variants": case.variants.len(),
        }))?;
    }
    if records.is_empty() {
        return Err(CliError::Domain(
            "dataset contains no variants to evaluate".into(),
        ));
    }
    let metrics = aggregate(&records)?;
    emit(&tagged("summary", &metrics)?)?;
    Ok(0)
}
