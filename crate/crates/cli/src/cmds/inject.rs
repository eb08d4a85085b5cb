//! `lecforge inject` — breed logical-error variants from correct programs.
//!
//! Each case bundle (meta.toml + correct source + tests) is corrupted
//! breadth-wise: mask a token, fill it with a plausible-but-different
//! candidate, keep only variants whose tests fail at runtime while still
//! parsing. The emitted dataset is one directory per case:
//!
//! ```text
//! out/<case>/case.json            name + profile
//! out/<case>/correct.txt          the original source
//! out/<case>/variants/NNN/source.txt
//! out/<case>/variants/NNN/truth.json   full variant record
//! ```
//!
//! Without `--runner`, cases in the bundled `mini` profile run through this
//! very binary's `run-mini` subcommand; other profiles must name a runner.
//! Without `--scorer`, a throwaway 4-gram trained on the loaded cases'
//! correct sources proposes the fills.

use std::path::PathBuf;

use clap::Args;
use lecforge_core::corpus::{Corpus, CorpusFile};
use lecforge_core::injector::cases::{load_cases, ProgramCase};
use lecforge_core::injector::runner::RunnerConfig;
use lecforge_core::injector::{generate, InjectorConfig, MaskWeights};
use lecforge_core::ngram::{train_ngram, NGramConfig};
use lecforge_core::profile::load_profile;
use lecforge_core::scorer::Scorer;
use lecforge_core::tokenizer::tokenize;
use serde_json::json;

use super::{emit, resolve_jobs, resolve_max_len, resolve_seed, write_text};
use crate::config::FileConfig;
use crate::scorers::ScorerOpts;
use crate::CliError;

#[derive(Debug, Args)]
pub struct InjectArgs {
    /// Directory of case bundles (each holds meta.toml, correct.<ext>, tests/).
    #[arg(value_name = "CASES")]
    pub cases: PathBuf,

    /// Dataset output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Runner command template; {src} expands to the program path.
    #[arg(long, value_name = "CMD")]
    pub runner: Option<String>,

    /// Parse/compile gate template run before any test.
    #[arg(long, value_name = "CMD")]
    pub check_cmd: Option<String>,

    /// Per-run wall-clock budget in seconds.
    #[arg(long)]
    pub timeout: Option<f64>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Parallel classification workers.
    #[arg(long)]
    pub jobs: Option<usize>,

    /// Token-chunk size for edit dispersion.
    #[arg(long, default_value_t = 20)]
    pub chunk_size: usize,

    /// Breeding rounds; also the maximum edits per variant.
    #[arg(long, default_value_t = 3)]
    pub max_generations: usize,

    /// Survivors kept per generation.
    #[arg(long, default_value_t = 8)]
    pub per_gen_cap: usize,

    /// Mask draws attempted per parent per generation.
    #[arg(long, default_value_t = 4)]
    pub mask_attempts: usize,

    /// Fill candidates requested per mask.
    #[arg(long, default_value_t = 10)]
    pub top_m: usize,

    /// Context-window token budget for fills.
    #[arg(long)]
    pub max_len: Option<usize>,

    #[command(flatten)]
    pub scorer: ScorerOpts,
}

/// A 4-gram trained on the cases' own correct sources — enough signal to
/// propose in-distribution fills when no model artifact is on hand.
fn fallback_ngram(cases: &[ProgramCase]) -> Result<Box<dyn Scorer>, CliError> {
    let mut files = Vec::with_capacity(cases.len());
    for case in cases {
        let profile = load_profile(&case.profile_name)?;
        files.push(CorpusFile {
            path: PathBuf::from(format!("{}/correct", case.name)),
            stream: tokenize(&case.correct_source, &profile),
        });
    }
    let corpus = Corpus {
        files,
        rejected: Vec::new(),
    };
    Ok(Box::new(train_ngram(&corpus, NGramConfig::default())?))
}

fn runner_for(
    case: &ProgramCase,
    args: &InjectArgs,
    file: &FileConfig,
) -> Result<RunnerConfig, CliError> {
    let flag_cmd = args.runner.clone().or_else(|| file.runner.command.clone());
    let (command, check_command) = match flag_cmd {
        Some(cmd) => (
            cmd,
            args.check_cmd
                .clone()
                .or_else(|| file.runner.check_command.clone()),
        ),
        None if case.profile_name == "mini" => {
            let exe = std::env::current_exe()
                .map_err(|e| CliError::Domain(format!("cannot locate own binary: {e}")))?;
            (
                format!("\"{}\" run-mini {{src}}", exe.display()),
                Some(format!("\"{}\" run-mini --check {{src}}", exe.display())),
            )
        }
        None => {
            return Err(CliError::Usage(format!(
                "--runner is required for case {} (profile {})",
                case.name, case.profile_name
            )))
        }
    };
    Ok(RunnerConfig {
        command,
        check_command,
        timeout_secs: args.timeout.or(file.runner.timeout_secs).unwrap_or(5.0),
        max_output_bytes: file.runner.max_output_bytes.unwrap_or(1 << 20),
    })
}

pub fn run(args: InjectArgs, file: &FileConfig) -> Result<i32, CliError> {
    let out = args
        .out
        .clone()
        .or_else(|| file.out_dir.clone())
        .ok_or_else(|| CliError::Usage("--out is required (dataset directory)".into()))?;
    let seed = resolve_seed(args.seed, file);
    let jobs = resolve_jobs(args.jobs, file)?;
    let max_len = resolve_max_len(args.max_len, file)?;

    let cases = load_cases(&args.cases)?;
    if cases.is_empty() {
        return Err(CliError::Domain(format!(
            "no case bundles under {}",
            args.cases.display()
        )));
    }

    let scorer: Box<dyn Scorer> = if args.scorer.choice(file)?.is_some() {
        let profile = load_profile(&cases[0].profile_name)?;
        args.scorer.build(file, &profile)?
    } else {
        fallback_ngram(&cases)?
    };

    std::fs::create_dir_all(&out)
        .map_err(|e| CliError::Domain(format!("create {}: {e}", out.display())))?;

    let mut total = 0usize;
    for (ci, case) in cases.iter().enumerate() {
        let runner = runner_for(case, &args, file)?;
        let config = InjectorConfig {
            chunk_size: args.chunk_size,
            max_generations: args.max_generations,
            per_gen_cap: args.per_gen_cap,
            mask_attempts: args.mask_attempts,
            top_m: args.top_m,
            max_len,
            // Per-case offset keeps case streams independent while the whole
            // dataset stays a pure function of --seed.
            seed: seed.wrapping_add(ci as u64),
            weights: MaskWeights::default(),
            jobs,
        };
        let variants = generate(scorer.as_ref(), case, &runner, &config)?;

        let case_dir = out.join(&case.name);
        let variants_dir = case_dir.join("variants");
        std::fs::create_dir_all(&variants_dir)
            .map_err(|e| CliError::Domain(format!("create {}: {e}", variants_dir.display())))?;
        write_text(
            &case_dir.join("case.json"),
            &serde_json::to_string_pretty(&json!({
                "name": case.name,
                "profile": case.profile_name,
            }))?,
        )?;
        write_text(&case_dir.join("correct.txt"), &case.correct_source)?;

        for (vi, variant) in variants.iter().enumerate() {
            let vdir = variants_dir.join(format!("{vi:03}"));
            std::fs::create_dir_all(&vdir)
                .map_err(|e| CliError::Domain(format!("create {}: {e}", vdir.display())))?;
            write_text(&vdir.join("source.txt"), &variant.source)?;
            write_text(&vdir.join("truth.json"), &serde_json::to_string_pretty(variant)?)?;
            emit(&json!({
                "kind": "variant",
                "case": case.name,
                "index": vi,
                "generation": variant.generation,
                "classification": variant.classification,
                "edits": variant.edits.len(),
                "token_sites": variant.ground_truth_token_indices,
            }))?;
        }
        total += variants.len();
        emit(&json!({
            "kind": "case",
            "name": case.name,
            "variants": variants.len(),
        }))?;
    }

    emit(&json!({
        "kind": "summary",
        "cases": cases.len(),
        "variants": total,
        "out": out.to_string_lossy(),
    }))?;
    Ok(0)
}
