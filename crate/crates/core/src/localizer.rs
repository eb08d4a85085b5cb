//! Statistical localization of suspicious tokens and lines.
//!
//! Given per-token log-probabilities, flag every token strictly below
//! `tau = mu - k * sigma`, where `mu` and `sigma` are the mean and
//! *population* standard deviation (divide by n) of the scored values.
//! Lines are flagged by the same rule applied to per-line mean
//! log-probabilities, reported alongside their perplexity
//! `ppl = exp(-mean)`.
//!
//! Definition and import lines (first non-indent token in the profile's
//! `def_keywords`) are excluded from both the statistics basis and the
//! candidate set: such lines score poorly under any local model yet rarely
//! hold the actual mistake.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::profile::LexProfile;
use crate::scorer::{ScoredProgram, Scorer};
use crate::tokenizer::{TokenKind, TokenStream};

/// Default sensitivity factor for `tau = mu - k * sigma`.
pub const DEFAULT_K: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationStats {
    pub mu: f64,
    pub sigma: f64,
    pub k: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineScore {
    pub line_index: usize,
    pub ppl: f64,
    pub mean_logprob: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExcludeReason {
    Definition,
    Import,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcludedLine {
    pub line: usize,
    pub reason: ExcludeReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub flagged_token_indices: Vec<usize>,
    pub flagged_line_indices: Vec<usize>,
    pub stats_token: LocalizationStats,
    pub stats_line: LocalizationStats,
    pub excluded_lines: Vec<ExcludedLine>,
}

/// Mean, population standard deviation, and threshold of a score basis.
pub fn compute_stats(values: &[f64], k: f64) -> Result<LocalizationStats> {
    if values.is_empty() {
        return Err(CoreError::Precondition(
            "statistics basis is empty: no scored tokens outside excluded lines".into(),
        ));
    }
    let n = values.len() as f64;
    let mu = values.iter().sum::<f64>() / n;
    let sigma = (values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n).sqrt();
    Ok(LocalizationStats {
        mu,
        sigma,
        k,
        tau: mu - k * sigma,
    })
}

/// Score every token with `scorer` and mark the positions that never enter
/// the statistics: the first token (no left context), comments, and
/// newlines.
pub fn score_program(scorer: &dyn Scorer, stream: &TokenStream) -> Result<ScoredProgram> {
    if !scorer.can_score() {
        return Err(CoreError::Precondition(format!(
            "scorer `{}` cannot score token streams",
            scorer.name()
        )));
    }
    let mut logprobs = scorer.score_stream(stream)?;
    let unscored = mask_structural(stream, &mut logprobs);
    ScoredProgram::new(stream.clone(), logprobs, unscored)
}

/// Zero out and flag the positions that never enter statistics: the first
/// token (which has no left context), comments, and newlines. Shared by
/// every path that builds a [`ScoredProgram`].
pub(crate) fn mask_structural(stream: &TokenStream, logprobs: &mut [f64]) -> Vec<bool> {
    let mut unscored = vec![false; stream.len()];
    for (i, tok) in stream.tokens().iter().enumerate() {
        if i == 0 || matches!(tok.kind, TokenKind::Comment | TokenKind::Newline) {
            unscored[i] = true;
            logprobs[i] = 0.0;
        }
    }
    unscored
}

/// Lines whose first non-indent token is a definition or import keyword.
pub fn excluded_lines(stream: &TokenStream, profile: &LexProfile) -> Vec<ExcludedLine> {
    let mut decided: BTreeSet<usize> = BTreeSet::new();
    let mut out = Vec::new();
    for tok in stream.tokens() {
        if tok.kind == TokenKind::Indent {
            continue;
        }
        if decided.insert(tok.line) && profile.def_keywords.contains(&tok.text) {
            let reason = match tok.text.as_str() {
                "import" | "from" | "package" => ExcludeReason::Import,
                _ => ExcludeReason::Definition,
            };
            out.push(ExcludedLine {
                line: tok.line,
                reason,
            });
        }
    }
    out
}

fn token_candidates(scored: &ScoredProgram, profile: &LexProfile) -> Vec<usize> {
    let excluded: BTreeSet<usize> = excluded_lines(&scored.stream, profile)
        .iter()
        .map(|e| e.line)
        .collect();
    (0..scored.stream.len())
        .filter(|&i| !scored.unscored[i] && !excluded.contains(&scored.stream.token(i).line))
        .collect()
}

/// Flag tokens strictly below the threshold. Unscored tokens and tokens on
/// excluded lines are removed from both the basis and the candidates.
pub fn flag_tokens(
    scored: &ScoredProgram,
    k: f64,
    profile: &LexProfile,
) -> Result<(Vec<usize>, LocalizationStats)> {
    let candidates = token_candidates(scored, profile);
    let basis: Vec<f64> = candidates.iter().map(|&i| scored.logprobs[i]).collect();
    let stats = compute_stats(&basis, k)?;
    let flagged = candidates
        .into_iter()
        .filter(|&i| scored.logprobs[i] < stats.tau)
        .collect();
    Ok((flagged, stats))
}

/// Per-line perplexity over scored tokens; lines with none are omitted.
pub fn line_perplexities(scored: &ScoredProgram) -> Vec<LineScore> {
    let mut by_line: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for (i, tok) in scored.stream.tokens().iter().enumerate() {
        if scored.unscored[i] {
            continue;
        }
        let entry = by_line.entry(tok.line).or_insert((0.0, 0));
        entry.0 += scored.logprobs[i];
        entry.1 += 1;
    }
    by_line
        .into_iter()
        .map(|(line, (sum, n))| {
            let mean = sum / n as f64;
            LineScore {
                line_index: line,
                ppl: (-mean).exp(),
                mean_logprob: mean,
            }
        })
        .collect()
}

/// Flag lines whose mean log-probability falls strictly below the line-level
/// threshold (equivalently, whose perplexity exceeds `exp(-tau)`).
pub fn flag_lines(
    scored: &ScoredProgram,
    line_scores: &[LineScore],
    k: f64,
    profile: &LexProfile,
) -> Result<(Vec<usize>, LocalizationStats)> {
    let excluded: BTreeSet<usize> = excluded_lines(&scored.stream, profile)
        .iter()
        .map(|e| e.line)
        .collect();
    let candidates: Vec<&LineScore> = line_scores
        .iter()
        .filter(|s| !excluded.contains(&s.line_index))
        .collect();
    let basis: Vec<f64> = candidates.iter().map(|s| s.mean_logprob).collect();
    let stats = compute_stats(&basis, k)?;
    let flagged = candidates
        .into_iter()
        .filter(|s| s.mean_logprob < stats.tau)
        .map(|s| s.line_index)
        .collect();
    Ok((flagged, stats))
}

/// Localize over an already-scored program (lets callers reuse one scoring
/// pass for the report, the line table, and charts).
pub fn localize_scored(
    scored: &ScoredProgram,
    k: f64,
    profile: &LexProfile,
) -> Result<LocalizationReport> {
    let (flagged_token_indices, stats_token) = flag_tokens(scored, k, profile)?;
    let line_scores = line_perplexities(scored);
    let (flagged_line_indices, stats_line) = flag_lines(scored, &line_scores, k, profile)?;
    Ok(LocalizationReport {
        flagged_token_indices,
        flagged_line_indices,
        stats_token,
        stats_line,
        excluded_lines: excluded_lines(&scored.stream, profile),
    })
}

/// One-shot pipeline: score, then flag tokens and lines.
pub fn localize(
    scorer: &dyn Scorer,
    stream: &TokenStream,
    k: f64,
    profile: &LexProfile,
) -> Result<LocalizationReport> {
    let scored = score_program(scorer, stream)?;
    localize_scored(&scored, k, profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Corpus, CorpusFile};
    use crate::ngram::{train_ngram, NGramConfig, Smoothing};
    use crate::profile::load_profile;
    use crate::tokenizer::tokenize;
    use proptest::prelude::*;
    use std::path::PathBuf;

    fn mini() -> LexProfile {
        load_profile("mini").unwrap()
    }

    /// Program of n whitespace-separated idents, every position scored.
    fn synthetic(logprobs: Vec<f64>) -> ScoredProgram {
        let text = (0..logprobs.len())
            .map(|i| format!("t{i}"))
            .collect::<Vec<_>>()
            .join(" ");
        let stream = tokenize(&text, &mini());
        assert_eq!(stream.len(), logprobs.len());
        let unscored = vec![false; logprobs.len()];
        ScoredProgram::new(stream, logprobs, unscored).unwrap()
    }

    #[test]
    fn stats_worked_example() {
        let s = compute_stats(&[-1.0, -1.0, -1.0, -9.0], 1.5).unwrap();
        assert_eq!(s.mu, -3.0);
        assert!((s.sigma - 12.0f64.sqrt()).abs() < 1e-12);
        assert!((s.tau - (-3.0 - 1.5 * 12.0f64.sqrt())).abs() < 1e-12);
        assert_eq!(s.tau, s.mu - s.k * s.sigma);
    }

    #[test]
    fn stats_degenerate_cases() {
        let s = compute_stats(&[-2.0, -2.0, -2.0], 7.0).unwrap();
        assert_eq!((s.sigma, s.tau), (0.0, -2.0));
        let s = compute_stats(&[-5.0], 1.5).unwrap();
        assert_eq!((s.mu, s.sigma, s.tau), (-5.0, 0.0, -5.0));
        assert!(matches!(
            compute_stats(&[], 1.5),
            Err(CoreError::Precondition(_))
        ));
    }

    #[test]
    fn flags_the_outlier_only() {
        let scored = synthetic(vec![-1.0, -1.0, -1.0, -9.0]);
        let (flagged, stats) = flag_tokens(&scored, 1.5, &mini()).unwrap();
        assert_eq!(flagged, vec![3]);
        assert!((-9.0) < stats.tau && (-1.0) >= stats.tau);
    }

    #[test]
    fn zero_variance_flags_nothing() {
        let scored = synthetic(vec![-3.0; 6]);
        let (flagged, _) = flag_tokens(&scored, 0.0, &mini()).unwrap();
        assert!(flagged.is_empty(), "strict inequality at sigma=0");
    }

    #[test]
    fn unscored_tokens_skip_basis_and_candidates() {
        let text = "a b # note\nc";
        let profile = load_profile("python-like").unwrap();
        let stream = tokenize(text, &profile);
        // tokens: a b <comment> <newline> c
        let kinds: Vec<TokenKind> = stream.tokens().iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            vec![
                TokenKind::Ident,
                TokenKind::Ident,
                TokenKind::Comment,
                TokenKind::Newline,
                TokenKind::Ident
            ]
        );
        struct Fixed(Vec<f64>);
        impl Scorer for Fixed {
            fn name(&self) -> &'static str {
                "fixed"
            }
            fn can_score(&self) -> bool {
                true
            }
            fn can_fill(&self) -> bool {
                false
            }
            fn score_stream(&self, _: &TokenStream) -> Result<Vec<f64>> {
                Ok(self.0.clone())
            }
            fn fill(
                &self,
                _: &[String],
                _: &[String],
                _: usize,
            ) -> Result<Vec<crate::scorer::FillCandidate>> {
                Err(CoreError::Precondition("no fill".into()))
            }
        }
        let scorer = Fixed(vec![-1.0, -2.0, -50.0, -50.0, -3.0]);
        let scored = score_program(&scorer, &stream).unwrap();
        assert_eq!(scored.unscored, vec![true, false, true, true, false]);
        // comment/newline scores were wild but are zeroed out and ignored
        assert_eq!(scored.scored_indices(), vec![1, 4]);
        let (flagged, stats) = flag_tokens(&scored, 1.0, &profile).unwrap();
        assert_eq!(stats.mu, -2.5);
        assert_eq!(stats.tau, -3.0);
        assert!(flagged.is_empty(), "-3.0 is not strictly below tau");
    }

    #[test]
    fn score_program_marks_first_token() {
        let profile = mini();
        let corpus = Corpus {
            files: vec![CorpusFile {
                path: PathBuf::from("mem"),
                stream: tokenize("a b a b a", &profile),
            }],
            rejected: vec![],
        };
        let model = train_ngram(
            &corpus,
            NGramConfig {
                order: 2,
                smoothing: Smoothing::None,
                unk_threshold: 1,
            },
        )
        .unwrap();
        let scored = score_program(&model, &tokenize("a b", &profile)).unwrap();
        assert_eq!(scored.unscored, vec![true, false]);
        assert_eq!(scored.logprobs, vec![0.0, 0.0]); // P(b|a) = 1
        // single-token program: scored but with an empty statistics basis
        let single = score_program(&model, &tokenize("a", &profile)).unwrap();
        assert_eq!(single.unscored, vec![true]);
        assert!(matches!(
            flag_tokens(&single, 1.5, &profile),
            Err(CoreError::Precondition(_))
        ));
    }

    #[test]
    fn definition_and_import_lines_are_excluded() {
        let profile = load_profile("python-like").unwrap();
        let text = "import os\ndef f():\nx = y\nz = w\n";
        let stream = tokenize(text, &profile);
        let excl = excluded_lines(&stream, &profile);
        assert_eq!(
            excl,
            vec![
                ExcludedLine {
                    line: 0,
                    reason: ExcludeReason::Import
                },
                ExcludedLine {
                    line: 1,
                    reason: ExcludeReason::Definition
                },
            ]
        );
        // give a def-line token an extreme score: it must not be flagged
        let n = stream.len();
        let mut logprobs = vec![-1.0; n];
        let mut unscored = vec![false; n];
        unscored[0] = true;
        for (i, t) in stream.tokens().iter().enumerate() {
            if t.kind == TokenKind::Newline {
                unscored[i] = true;
            }
            if t.text == "f" {
                logprobs[i] = -9.0;
            }
        }
        let scored = ScoredProgram::new(stream, logprobs, unscored).unwrap();
        let (flagged, _) = flag_tokens(&scored, 1.5, &profile).unwrap();
        assert!(flagged.is_empty());
        let report = localize_scored(&scored, 1.5, &profile).unwrap();
        assert_eq!(report.excluded_lines, excl);
        assert!(report.flagged_token_indices.is_empty());
    }

    #[test]
    fn line_perplexity_analytic_values() {
        let ln2 = std::f64::consts::LN_2;
        // two tokens on line 0 at -ln2 each, one token on line 1 at 0
        let profile = mini();
        let stream = tokenize("a b\nc", &profile);
        // tokens: a b <newline> c ; newline unscored
        let scored = ScoredProgram::new(
            stream,
            vec![-ln2, -ln2, 0.0, 0.0],
            vec![false, false, true, false],
        )
        .unwrap();
        let scores = line_perplexities(&scored);
        assert_eq!(scores.len(), 2);
        assert_eq!(scores[0].line_index, 0);
        assert!((scores[0].ppl - 2.0).abs() < 1e-12);
        assert_eq!(scores[1].ppl, 1.0);
        // monotonicity: lower mean log-prob, strictly higher ppl
        assert!(scores[0].mean_logprob < scores[1].mean_logprob);
        assert!(scores[0].ppl > scores[1].ppl);
    }

    #[test]
    fn flag_lines_worked_example() {
        // three lines of two tokens each, line means -1, -1, -8, k=1
        let profile = mini();
        let stream = tokenize("a b\nc d\ne f", &profile);
        let mut logprobs = Vec::new();
        let mut unscored = Vec::new();
        for t in stream.tokens() {
            if t.kind == TokenKind::Newline {
                logprobs.push(0.0);
                unscored.push(true);
            } else {
                logprobs.push(match t.line {
                    2 => -8.0,
                    _ => -1.0,
                });
                unscored.push(false);
            }
        }
        let scored = ScoredProgram::new(stream, logprobs, unscored).unwrap();
        let line_scores = line_perplexities(&scored);
        let (flagged, stats) = flag_lines(&scored, &line_scores, 1.0, &profile).unwrap();
        assert_eq!(flagged, vec![2]);
        assert!((stats.mu - (-10.0 / 3.0)).abs() < 1e-12);
        assert!((stats.sigma - (98.0f64 / 9.0).sqrt()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn threshold_monotone_in_k(
            values in proptest::collection::vec(-20.0f64..=0.0, 2..60),
            k1 in 0.0f64..3.0,
            dk in 0.0f64..3.0,
        ) {
            let scored = synthetic(values);
            let profile = mini();
            let (f1, _) = flag_tokens(&scored, k1, &profile).unwrap();
            let (f2, _) = flag_tokens(&scored, k1 + dk, &profile).unwrap();
            // larger k means a lower threshold, so flags can only shrink
            prop_assert!(f2.iter().all(|i| f1.contains(i)));
        }

        #[test]
        fn flags_invariant_under_shift(
            values in proptest::collection::vec(-20.0f64..=0.0, 2..60),
            shift in -10.0f64..=0.0,
        ) {
            let profile = mini();
            let base = synthetic(values.clone());
            let shifted = synthetic(values.iter().map(|v| v + shift).collect());
            let (f1, _) = flag_tokens(&base, 1.5, &profile).unwrap();
            let (f2, _) = flag_tokens(&shifted, 1.5, &profile).unwrap();
            prop_assert_eq!(f1, f2);
        }

        #[test]
        fn matches_brute_force_oracle(
            values in proptest::collection::vec(-30.0f64..=0.0, 1..120),
        ) {
            let n = values.len() as f64;
            let mu: f64 = values.iter().sum::<f64>() / n;
            let var: f64 = values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
            let tau = mu - 1.5 * var.sqrt();
            let expect: Vec<usize> = values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v < tau)
                .map(|(i, _)| i)
                .collect();
            let scored = synthetic(values);
            let (flagged, stats) = flag_tokens(&scored, 1.5, &mini()).unwrap();
            prop_assert_eq!(flagged, expect);
            prop_assert!((stats.tau - tau).abs() < 1e-12);
        }
    }
}
