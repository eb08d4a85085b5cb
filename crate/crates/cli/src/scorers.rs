//! Scorer construction shared by every subcommand that scores or fills.
//!
//! Three back ends: `ngram` (a trained count model loaded from disk), `mlm`
//! (the micro masked LM plus its JSON vocabulary sidecar), and `remote` (a
//! completions endpoint speaking echoed log-probs). The sidecar lives next
//! to the checkpoint as `<file>.vocab.json` — the checkpoint format stores
//! tensors only, so the text<->id map travels separately and the pairing is
//! validated when the scorer is built.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use lecforge_core::mlm::checkpoint;
use lecforge_core::mlm::scorer::MlmScorer;
use lecforge_core::ngram::NGramModel;
use lecforge_core::profile::LexProfile;
use lecforge_core::remote::{RemoteConfig, RemoteScorer};
use lecforge_core::scorer::Scorer;
use lecforge_core::vocab::{Vocab, MASK, UNK};

use crate::config::{FileConfig, RemoteSection};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScorerChoice {
    /// Count-based n-gram model trained with `train-ngram`.
    Ngram,
    /// Micro masked language model trained with `train-mlm`.
    Mlm,
    /// Completions API endpoint with echoed log-probs.
    Remote,
}

/// Flags shared by every scoring subcommand, resolved against the config
/// file under flag > file > default precedence.
#[derive(Debug, clap::Args)]
pub struct ScorerOpts {
    /// Scoring back end.
    #[arg(long, value_enum)]
    pub scorer: Option<ScorerChoice>,

    /// Trained n-gram model (required with --scorer ngram).
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,

    /// Micro-MLM checkpoint (required with --scorer mlm).
    #[arg(long, value_name = "FILE")]
    pub mlm: Option<PathBuf>,

    /// Completions endpoint base URL (required with --scorer remote).
    #[arg(long, value_name = "URL")]
    pub remote_url: Option<String>,

    /// Model name sent to the remote endpoint.
    #[arg(long, value_name = "NAME")]
    pub remote_model: Option<String>,
}

impl ScorerOpts {
    /// Back end named by flag or config file, if either names one.
    pub fn choice(&self, file: &FileConfig) -> Result<Option<ScorerChoice>, CliError> {
        match (self.scorer, file.scorer.as_deref()) {
            (Some(c), _) => Ok(Some(c)),
            (None, Some(s)) => ScorerChoice::from_str(s, true).map(Some).map_err(|_| {
                CliError::Usage(format!(
                    "config scorer: unknown value {s:?} (expected ngram, mlm, or remote)"
                ))
            }),
            (None, None) => Ok(None),
        }
    }

    /// Build the selected scorer; `profile` feeds the remote back end's
    /// tokenizer-alignment logic.
    pub fn build(
        &self,
        file: &FileConfig,
        profile: &LexProfile,
    ) -> Result<Box<dyn Scorer>, CliError> {
        let choice = self.choice(file)?.ok_or_else(|| {
            CliError::Usage("--scorer is required (ngram, mlm, or remote)".into())
        })?;
        match choice {
            ScorerChoice::Ngram => {
                let path = self
                    .model
                    .clone()
                    .or_else(|| file.model.clone())
                    .ok_or_else(|| {
                        CliError::Usage("--model is required with --scorer ngram".into())
                    })?;
                Ok(Box::new(NGramModel::load(&path)?))
            }
            ScorerChoice::Mlm => {
                let path = self.mlm.clone().or_else(|| file.mlm.clone()).ok_or_else(|| {
                    CliError::Usage("--mlm is required with --scorer mlm".into())
                })?;
                let model = checkpoint::load_full(&path)?;
                let vocab = load_vocab(&vocab_sidecar(&path))?;
                Ok(Box::new(MlmScorer::new(model, vocab)?))
            }
            ScorerChoice::Remote => {
                let cfg = resolve_remote(
                    self.remote_url.clone(),
                    self.remote_model.clone(),
                    &file.remote,
                )?;
                Ok(Box::new(RemoteScorer::new(cfg, profile.clone())?))
            }
        }
    }
}

/// Merge remote flags, config-file section, and defaults.
pub fn resolve_remote(
    url: Option<String>,
    model: Option<String>,
    section: &RemoteSection,
) -> Result<RemoteConfig, CliError> {
    let defaults = RemoteConfig::default();
    let base_url = url.or_else(|| section.base_url.clone()).ok_or_else(|| {
        CliError::Usage(
            "--remote-url (or [remote] base_url in the config file) is required with --scorer remote"
                .into(),
        )
    })?;
    Ok(RemoteConfig {
        base_url,
        model_name: model
            .or_else(|| section.model_name.clone())
            .unwrap_or(defaults.model_name),
        api_key_env: section.api_key_env.clone().unwrap_or(defaults.api_key_env),
        timeout_secs: section.timeout_secs.unwrap_or(defaults.timeout_secs),
        max_retries: section.max_retries.unwrap_or(defaults.max_retries),
        backoff_base_secs: section
            .backoff_base_secs
            .unwrap_or(defaults.backoff_base_secs),
        max_in_flight: section.max_in_flight.unwrap_or(defaults.max_in_flight),
    })
}

/// Vocabulary sidecar path for an MLM checkpoint: `<file>.vocab.json`.
pub fn vocab_sidecar(checkpoint: &Path) -> PathBuf {
    let mut name = checkpoint.as_os_str().to_os_string();
    name.push(".vocab.json");
    PathBuf::from(name)
}

/// Write the vocabulary as a JSON array of token texts in id order.
pub fn save_vocab(vocab: &Vocab, path: &Path) -> Result<(), CliError> {
    let items: Vec<&str> = vocab.iter().map(|(_, text)| text).collect();
    let json = serde_json::to_string_pretty(&items)?;
    std::fs::write(path, json)
        .map_err(|e| CliError::Domain(format!("write {}: {e}", path.display())))
}

/// Read a sidecar back; the two reserved entries must lead, and entries
/// must be unique so ids survive the round trip.
pub fn load_vocab(path: &Path) -> Result<Vocab, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Domain(format!("vocab sidecar {}: {e}", path.display())))?;
    let items: Vec<String> = serde_json::from_str(&text)
        .map_err(|e| CliError::Domain(format!("vocab sidecar {}: {e}", path.display())))?;
    if items.first().map(String::as_str) != Some(UNK)
        || items.get(1).map(String::as_str) != Some(MASK)
    {
        return Err(CliError::Domain(format!(
            "vocab sidecar {}: first two entries must be {UNK:?} and {MASK:?}",
            path.display()
        )));
    }
    let mut vocab = Vocab::new();
    for (i, item) in items.iter().enumerate().skip(2) {
        let id = vocab.insert(item);
        if id as usize != i {
            return Err(CliError::Domain(format!(
                "vocab sidecar {}: duplicate entry {item:?}",
                path.display()
            )));
        }
    }
    Ok(vocab)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sidecar_name_appends_suffix() {
        assert_eq!(
            vocab_sidecar(Path::new("dir/model.mlm")),
            PathBuf::from("dir/model.mlm.vocab.json")
        );
    }

    #[test]
    fn vocab_round_trips_through_the_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.vocab.json");
        let mut vocab = Vocab::new();
        for t in ["let", "x", "=", "1", "\n"] {
            vocab.insert(t);
        }
        save_vocab(&vocab, &path).unwrap();
        let back = load_vocab(&path).unwrap();
        assert_eq!(back, vocab);
        assert_eq!(back.id_of("\n"), vocab.id_of("\n"));
    }

    #[test]
    fn sidecar_missing_reserved_entries_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.vocab.json");
        std::fs::write(&path, r#"["let", "x"]"#).unwrap();
        let err = load_vocab(&path).unwrap_err();
        assert!(matches!(err, CliError::Domain(m) if m.contains("<unk>")));
    }

    #[test]
    fn sidecar_duplicates_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.vocab.json");
        std::fs::write(&path, r#"["<unk>", "<mask>", "x", "x"]"#).unwrap();
        let err = load_vocab(&path).unwrap_err();
        assert!(matches!(err, CliError::Domain(m) if m.contains("duplicate")));
    }

    #[test]
    fn remote_resolution_requires_a_url() {
        let err = resolve_remote(None, None, &RemoteSection::default()).unwrap_err();
        assert!(matches!(err, CliError::Usage(m) if m.contains("--remote-url")));
    }

    #[test]
    fn remote_flags_override_section_values() {
        let section = RemoteSection {
            base_url: Some("http://file-url".into()),
            model_name: Some("from-file".into()),
            max_retries: Some(9),
            ..RemoteSection::default()
        };
        let cfg = resolve_remote(Some("http://flag-url".into()), None, &section).unwrap();
        assert_eq!(cfg.base_url, "http://flag-url");
        assert_eq!(cfg.model_name, "from-file");
        assert_eq!(cfg.max_retries, 9);
        assert_eq!(cfg.timeout_secs, RemoteConfig::default().timeout_secs);
    }
}
