//! `lecforge train-mlm` — train the micro masked language model.
//!
//! The corpus is lexed, mapped through a fresh vocabulary, and chunked into
//! windows that fit the model alongside its soft prompt. Two artifacts come
//! out: the checkpoint at `--out` plus a `<out>.vocab.json` sidecar holding
//! the token<->id map. Prompt-tuning runs additionally write a compact
//! `<out>.prompt` checkpoint containing only the trainable rows.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use lecforge_core::corpus::{ingest_corpus, Corpus, CorpusFilter};
use lecforge_core::mlm::checkpoint::{save_full, save_prompt};
use lecforge_core::mlm::train::{build_and_train, Mode, TrainConfig};
use lecforge_core::mlm::{Placement, PromptInit};
use lecforge_core::vocab::Vocab;
use serde_json::json;

use super::{emit, resolve_profile, resolve_seed};
use crate::config::FileConfig;
use crate::scorers::{save_vocab, vocab_sidecar};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeChoice {
    /// Full fine-tune: every tensor trains.
    Ft,
    /// Prompt-tune: backbone frozen, soft prompt (and head) train.
    Pt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitChoice {
    /// Average backbone embedding, copied into every prompt row.
    BackboneCopy,
    /// Small random values.
    Random,
    /// All ones.
    ConstOne,
    /// One embedding row, repeated.
    SameToken,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlacementChoice {
    Front,
    Back,
    Mid,
    Random,
}

impl From<ModeChoice> for Mode {
    fn from(c: ModeChoice) -> Self {
        match c {
            ModeChoice::Ft => Mode::Ft,
            ModeChoice::Pt => Mode::Pt,
        }
    }
}

impl From<InitChoice> for PromptInit {
    fn from(c: InitChoice) -> Self {
        match c {
            InitChoice::BackboneCopy => PromptInit::BackboneCopy,
            InitChoice::Random => PromptInit::Random,
            InitChoice::ConstOne => PromptInit::ConstOne,
            InitChoice::SameToken => PromptInit::SameToken,
        }
    }
}

impl From<PlacementChoice> for Placement {
    fn from(c: PlacementChoice) -> Self {
        match c {
            PlacementChoice::Front => Placement::Front,
            PlacementChoice::Back => Placement::Back,
            PlacementChoice::Mid => Placement::Mid,
            PlacementChoice::Random => Placement::Random,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainMlmArgs {
    /// Source roots (files or directories) to train on.
    #[arg(value_name = "ROOT", required = true)]
    pub roots: Vec<PathBuf>,

    #[arg(long, value_enum, default_value_t = ModeChoice::Pt)]
    pub mode: ModeChoice,

    /// Soft-prompt rows inserted around the text window.
    #[arg(long, default_value_t = 40)]
    pub prompt_len: usize,

    #[arg(long, value_enum, default_value_t = InitChoice::BackboneCopy)]
    pub prompt_init: InitChoice,

    #[arg(long, value_enum, default_value_t = PlacementChoice::Front)]
    pub placement: PlacementChoice,

    /// Fraction of maskable tokens hidden per training example.
    #[arg(long, default_value_t = 0.55)]
    pub mask_pct: f64,

    #[arg(long, default_value_t = 100)]
    pub steps: usize,

    #[arg(long, default_value_t = 8)]
    pub batch_size: usize,

    #[arg(long, default_value_t = 5e-5)]
    pub lr: f64,

    #[arg(long, default_value_t = 0.01)]
    pub weight_decay: f64,

    /// Keep the output head frozen in prompt-tuning mode.
    #[arg(long)]
    pub freeze_head: bool,

    /// Embedding width.
    #[arg(long, default_value_t = 32)]
    pub d: usize,

    /// Maximum sequence rows (soft prompt + text window).
    #[arg(long)]
    pub max_len: Option<usize>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Output checkpoint path.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,

    #[arg(long)]
    pub profile: Option<String>,
}

/// Map every accepted file through the vocabulary and slice the id streams
/// into windows of at most `window` tokens.
pub(crate) fn corpus_sequences(corpus: &Corpus, vocab: &Vocab, window: usize) -> Vec<Vec<usize>> {
    let mut sequences = Vec::new();
    for file in &corpus.files {
        let ids: Vec<usize> = file
            .stream
            .tokens()
            .iter()
            .map(|t| vocab.id_or_unk(&t.text) as usize)
            .collect();
        for chunk in ids.chunks(window) {
            if chunk.len() >= 2 {
                sequences.push(chunk.to_vec());
            }
        }
    }
    sequences
}

/// Prompt-only checkpoint path: `<file>.prompt`.
fn prompt_sidecar(checkpoint: &Path) -> PathBuf {
    let mut name = checkpoint.as_os_str().to_os_string();
    name.push(".prompt");
    PathBuf::from(name)
}

pub fn run(args: TrainMlmArgs, file: &FileConfig) -> Result<i32, CliError> {
    let profile = resolve_profile(&args.profile, file)?;
    let max_len = args.max_len.or(file.max_len).unwrap_or(128);
    let window = max_len.saturating_sub(args.prompt_len);
    if window < 2 {
        return Err(CliError::Usage(format!(
            "--prompt-len {} leaves no text window under --max-len {max_len}",
            args.prompt_len
        )));
    }
    let corpus = ingest_corpus(&args.roots, &CorpusFilter::default(), &profile)?;
    let vocab = Vocab::from_corpus(&corpus);
    let sequences = corpus_sequences(&corpus, &vocab, window);
    if sequences.is_empty() {
        return Err(CliError::Domain(
            "corpus yields no training window of at least two tokens".into(),
        ));
    }

    let config = TrainConfig {
        mode: args.mode.into(),
        prompt_length: args.prompt_len,
        prompt_init: args.prompt_init.into(),
        placement: args.placement.into(),
        mask_percentage: args.mask_pct,
        steps: args.steps,
        batch_size: args.batch_size,
        learning_rate: args.lr,
        weight_decay: args.weight_decay,
        freeze_head: args.freeze_head,
        seed: resolve_seed(args.seed, file),
    };
    let (model, report) = build_and_train(&sequences, vocab.len(), args.d, max_len, &config)?;

    save_full(&model, &args.out)?;
    save_vocab(&vocab, &vocab_sidecar(&args.out))?;
    let prompt_out = if args.mode == ModeChoice::Pt {
        let path = prompt_sidecar(&args.out);
        save_prompt(&model, &path)?;
        Some(path)
    } else {
        None
    };

    emit(&json!({
        "kind": "curve",
        "loss": report.loss_curve,
        "accuracy": report.accuracy_curve,
    }))?;
    emit(&json!({
        "kind": "summary",
        "sequences": sequences.len(),
        "vocab": vocab.len(),
        "final_accuracy": report.final_accuracy,
        "out": args.out.to_string_lossy(),
        "prompt_out": prompt_out.as_ref().map(|p| p.to_string_lossy().into_owned()),
    }))?;
    Ok(0)
}
