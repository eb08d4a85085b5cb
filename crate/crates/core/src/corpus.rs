//! Corpus ingestion with the quality filter applied before tokenization.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::error::{CoreError, Result};
use crate::profile::LexProfile;
use crate::tokenizer::{tokenize, TokenStream};

/// Per-file quality gates. A file must pass all three to enter the corpus:
/// average line length strictly below `max_avg_line_len`, every line strictly
/// shorter than `max_line_len`, and alphanumeric fraction strictly above
/// `min_alnum_fraction` (computed over all non-newline characters).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusFilter {
    pub max_avg_line_len: f64,
    pub max_line_len: usize,
    pub min_alnum_fraction: f64,
}

impl Default for CorpusFilter {
    fn default() -> Self {
        CorpusFilter {
            max_avg_line_len: 60.0,
            max_line_len: 100,
            min_alnum_fraction: 0.45,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    AvgLineLen,
    MaxLineLen,
    AlnumFraction,
    Unreadable,
}

impl CorpusFilter {
    /// `None` means accepted.
    pub fn check(&self, text: &str) -> Option<RejectReason> {
        let mut line_count = 0usize;
        let mut char_total = 0usize;
        for line in text.lines() {
            let len = line.chars().count();
            if len >= self.max_line_len {
                return Some(RejectReason::MaxLineLen);
            }
            line_count += 1;
            char_total += len;
        }
        let avg = if line_count == 0 {
            0.0
        } else {
            char_total as f64 / line_count as f64
        };
        if avg >= self.max_avg_line_len {
            return Some(RejectReason::AvgLineLen);
        }
        let mut alnum = 0usize;
        let mut total = 0usize;
        for c in text.chars() {
            if c == '\n' || c == '\r' {
                continue;
            }
            total += 1;
            if c.is_alphanumeric() {
                alnum += 1;
            }
        }
        if total == 0 || (alnum as f64 / total as f64) <= self.min_alnum_fraction {
            return Some(RejectReason::AlnumFraction);
        }
        None
    }
}

#[derive(Debug)]
pub struct CorpusFile {
    pub path: PathBuf,
    pub stream: TokenStream,
}

#[derive(Debug)]
pub struct Corpus {
    pub files: Vec<CorpusFile>,
    pub rejected: Vec<(PathBuf, RejectReason)>,
}

impl Corpus {
    pub fn accepted_count(&self) -> usize {
        self.files.len()
    }

    pub fn rejected_count(&self) -> usize {
        self.rejected.len()
    }

    pub fn total_tokens(&self) -> usize {
        self.files.iter().map(|f| f.stream.len()).sum()
    }
}

/// Walk `roots` (files or directories), filter, and tokenize what survives.
///
/// Files are visited in sorted path order so corpus construction — and
/// everything trained from it — is deterministic. An unreadable root is an
/// error; an unreadable or non-UTF-8 file inside a root is merely rejected.
pub fn ingest_corpus(
    roots: &[PathBuf],
    filter: &CorpusFilter,
    profile: &LexProfile,
) -> Result<Corpus> {
    let mut paths: Vec<PathBuf> = Vec::new();
    for root in roots {
        if !root.exists() {
            return Err(CoreError::io(
                root,
                std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
            ));
        }
        if root.is_file() {
            paths.push(root.clone());
            continue;
        }
        for entry in WalkDir::new(root).sort_by_file_name() {
            let entry = entry.map_err(|e| {
                CoreError::io(root, std::io::Error::other(e.to_string()))
            })?;
            if entry.file_type().is_file() {
                paths.push(entry.into_path());
            }
        }
    }
    paths.sort();
    paths.dedup();

    let mut corpus = Corpus {
        files: Vec::new(),
        rejected: Vec::new(),
    };
    for path in paths {
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(_) => {
                corpus.rejected.push((path, RejectReason::Unreadable));
                continue;
            }
        };
        match filter.check(&text) {
            Some(reason) => corpus.rejected.push((path, reason)),
            None => corpus.files.push(CorpusFile {
                stream: tokenize(&text, profile),
                path,
            }),
        }
    }
    if corpus.files.is_empty() {
        return Err(CoreError::EmptyCorpus);
    }
    Ok(corpus)
}
