//! Metrics over localization and repair runs: token/line localization
//! recall and precision, top-k repair accuracy under exact match, joint
//! full-program repair, and a two-component CodeBLEU-lite similarity.
//!
//! CodeBLEU-lite is deliberately not full CodeBLEU: the AST-match and
//! dataflow components are dropped and the remaining two n-gram components
//! are weighted 0.5/0.5, so absolute scores are comparable only within this
//! toolkit. The unigram precision is left unsmoothed so disjoint programs
//! score exactly zero; higher orders use add-one smoothing so short
//! programs aren't annihilated by an empty 4-gram table.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::injector::{final_edit_positions, EditOp, EditRecord, InjectionVariant};
use crate::localizer::{self, LocalizationReport};
use crate::profile::LexProfile;
use crate::repairer::{mask_tokens, repair_autoregressive};
use crate::scorer::Scorer;
use crate::tokenizer::{detokenize, tokenize, TokenKind, TokenStream};

/// Token- and line-level localization quality for one program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocMetrics {
    pub token_recall: f64,
    pub token_precision: f64,
    /// Every ground-truth token was flagged.
    pub token_program_hit: bool,
    pub line_recall: f64,
}

fn recall_of(flagged: &BTreeSet<usize>, truth: &BTreeSet<usize>) -> f64 {
    if truth.is_empty() {
        return 1.0;
    }
    let hit = truth.intersection(flagged).count();
    hit as f64 / truth.len() as f64
}

fn precision_of(flagged: &BTreeSet<usize>, truth: &BTreeSet<usize>) -> f64 {
    if flagged.is_empty() {
        // nothing flagged: vacuously right only when there was nothing to find
        return if truth.is_empty() { 1.0 } else { 0.0 };
    }
    let hit = truth.intersection(flagged).count();
    hit as f64 / flagged.len() as f64
}

/// Score a localization report against known error positions.
pub fn localization_metrics(
    report: &LocalizationReport,
    token_truth: &[usize],
    line_truth: &[usize],
) -> LocMetrics {
    let flagged_tokens: BTreeSet<usize> = report.flagged_token_indices.iter().copied().collect();
    let truth_tokens: BTreeSet<usize> = token_truth.iter().copied().collect();
    let flagged_lines: BTreeSet<usize> = report.flagged_line_indices.iter().copied().collect();
    let truth_lines: BTreeSet<usize> = line_truth.iter().copied().collect();
    LocMetrics {
        token_recall: recall_of(&flagged_tokens, &truth_tokens),
        token_precision: precision_of(&flagged_tokens, &truth_tokens),
        token_program_hit: truth_tokens.is_subset(&flagged_tokens),
        line_recall: recall_of(&flagged_lines, &truth_lines),
    }
}

/// Fraction of positions whose true token appears among the first `k`
/// candidates, for each `k`. Candidate list *i* must belong to truth token
/// *i*; anything else is a caller bug, not a metric.
pub fn repair_topk(
    per_mask_candidates: &[Vec<String>],
    truth: &[String],
    ks: &[usize],
) -> Result<BTreeMap<usize, f64>> {
    if per_mask_candidates.len() != truth.len() {
        return Err(CoreError::Precondition(format!(
            "{} candidate lists for {} truth tokens",
            per_mask_candidates.len(),
            truth.len()
        )));
    }
    let mut out = BTreeMap::new();
    for &k in ks {
        let acc = if truth.is_empty() {
            1.0
        } else {
            let hits = per_mask_candidates
                .iter()
                .zip(truth)
                .filter(|(cands, t)| cands.iter().take(k).any(|c| c == *t))
                .count();
            hits as f64 / truth.len() as f64
        };
        out.insert(k, acc);
    }
    let mut prev = 0.0;
    for (_, &acc) in &out {
        assert!(acc >= prev, "top-k accuracy must be nondecreasing in k");
        prev = acc;
    }
    Ok(out)
}

/// BLEU-4 over token texts with per-gram weights. Unigram precision is
/// exact; 2–4-gram precisions are add-one smoothed; brevity penalty
/// min(1, e^(1−r/c)).
fn weighted_bleu4(candidate: &[String], reference: &[String], weight: impl Fn(&[String]) -> f64) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return if candidate.is_empty() && reference.is_empty() {
            1.0
        } else {
            0.0
        };
    }
    let mut product = 1.0;
    for n in 1..=4 {
        let mut ref_counts: HashMap<&[String], u64> = HashMap::new();
        if reference.len() >= n {
            for gram in reference.windows(n) {
                *ref_counts.entry(gram).or_insert(0) += 1;
            }
        }
        let mut cand_counts: HashMap<&[String], u64> = HashMap::new();
        if candidate.len() >= n {
            for gram in candidate.windows(n) {
                *cand_counts.entry(gram).or_insert(0) += 1;
            }
        }
        let mut total = 0.0;
        let mut matched = 0.0;
        for (gram, &count) in &cand_counts {
            let w = weight(gram);
            let clipped = count.min(ref_counts.get(gram).copied().unwrap_or(0));
            total += w * count as f64;
            matched += w * clipped as f64;
        }
        let p = if n == 1 {
            if total == 0.0 {
                0.0
            } else {
                matched / total
            }
        } else {
            (matched + 1.0) / (total + 1.0)
        };
        if p == 0.0 {
            return 0.0;
        }
        product *= p;
    }
    let c = candidate.len() as f64;
    let r = reference.len() as f64;
    let bp = (1.0 - r / c).exp().min(1.0);
    (bp * product.powf(0.25)).clamp(0.0, 1.0)
}

/// 0.5 · plain BLEU-4 + 0.5 · keyword-weighted BLEU-4, where any n-gram
/// containing a keyword counts five-fold. Identical token sequences score
/// exactly 1.
pub fn codebleu_lite(
    candidate: &[String],
    reference: &[String],
    keywords: &BTreeSet<String>,
) -> f64 {
    let plain = weighted_bleu4(candidate, reference, |_| 1.0);
    let weighted = weighted_bleu4(candidate, reference, |gram| {
        if gram.iter().any(|t| keywords.contains(t)) {
            5.0
        } else {
            1.0
        }
    });
    (0.5 * plain + 0.5 * weighted).clamp(0.0, 1.0)
}

/// Repair-oriented bug taxonomy, derived mechanically from edit records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorClass {
    OperatorMisuse,
    VariableMisuse,
    Literal,
    ControlFlow,
    /// A token was removed: the fix must complete the statement.
    Incomplete,
    /// A token was added: the fix must drop the redundant operation.
    Redundant,
}

impl ErrorClass {
    pub fn label(self) -> &'static str {
        match self {
            ErrorClass::OperatorMisuse => "operator-misuse",
            ErrorClass::VariableMisuse => "variable-misuse",
            ErrorClass::Literal => "literal",
            ErrorClass::ControlFlow => "control-flow",
            ErrorClass::Incomplete => "incomplete",
            ErrorClass::Redundant => "redundant",
        }
    }
}

/// Label one edit by what kind of token it corrupted.
pub fn classify_edit(edit: &EditRecord, profile: &LexProfile) -> ErrorClass {
    match edit.op {
        EditOp::Delete => ErrorClass::Incomplete,
        EditOp::Insert => ErrorClass::Redundant,
        EditOp::Replace => {
            let old = edit.old.as_deref().unwrap_or("");
            match tokenize(old, profile).tokens().first().map(|t| t.kind) {
                Some(TokenKind::Keyword) => ErrorClass::ControlFlow,
                Some(TokenKind::Operator) => ErrorClass::OperatorMisuse,
                Some(TokenKind::Number) | Some(TokenKind::String) => ErrorClass::Literal,
                _ => ErrorClass::VariableMisuse,
            }
        }
    }
}

/// Outcome of the end-to-end localize → mask → top-1 repair pipeline on
/// one buggy program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointRepairOutcome {
    pub full_repair: bool,
    pub codebleu: f64,
    pub repaired_source: String,
    pub flagged_token_indices: Vec<usize>,
    /// A pipeline error is a failed repair, not a crash; it lands here.
    pub failure: Option<String>,
}

/// Localize suspicious tokens in `variant_source`, mask them, fill each
/// mask with the scorer's top candidate, and compare against the correct
/// program token-for-token.
pub fn joint_repair(
    scorer: &dyn Scorer,
    variant_source: &str,
    correct_source: &str,
    k: f64,
    k_keep: usize,
    max_len: usize,
    profile: &LexProfile,
) -> JointRepairOutcome {
    let stream = tokenize(variant_source, profile);
    let correct = tokenize(correct_source, profile);

    let attempt = (|| -> Result<(Vec<usize>, TokenStream)> {
        let scored = localizer::score_program(scorer, &stream)?;
        let (flagged, _) = localizer::flag_tokens(&scored, k, profile)?;
        let masked = mask_tokens(&stream, &flagged)?;
        let repaired = repair_autoregressive(scorer, &masked, k_keep, max_len)?;
        Ok((flagged, repaired.repaired_stream))
    })();

    let (flagged, repaired, failure) = match attempt {
        Ok((flagged, repaired)) => (flagged, repaired, None),
        Err(e) => (Vec::new(), stream.clone(), Some(e.to_string())),
    };
    let full_repair = repaired.texts() == correct.texts();
    let codebleu = codebleu_lite(&repaired.texts(), &correct.texts(), &profile.keywords);
    JointRepairOutcome {
        full_repair,
        codebleu,
        repaired_source: detokenize(&repaired),
        flagged_token_indices: flagged,
        failure,
    }
}

/// Everything measured for one injected variant; one JSONL row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub case_name: String,
    pub generation: usize,
    pub loc: LocMetrics,
    /// Top-k accuracy at the *known* error positions (replace edits only).
    pub repair_topk: BTreeMap<usize, f64>,
    /// How many positions fed the top-k numbers; 0 means no replace edits.
    pub repair_positions: usize,
    pub full_repair: bool,
    pub codebleu: f64,
    pub error_classes: Vec<ErrorClass>,
}

/// Evaluate one injected variant end to end: localization quality against
/// its ground truth, top-k repair accuracy at the true replace positions,
/// and the joint localize+repair pipeline.
pub fn evaluate_variant(
    scorer: &dyn Scorer,
    variant: &InjectionVariant,
    correct_source: &str,
    k: f64,
    ks: &[usize],
    max_len: usize,
    profile: &LexProfile,
) -> Result<CaseRecord> {
    let stream = tokenize(&variant.source, profile);
    let base_len = {
        // the injector strips comments before editing, so replay against that
        let mut base = tokenize(correct_source, profile);
        for i in (0..base.len()).rev() {
            if base.token(i).kind == TokenKind::Comment {
                base.remove(i);
            }
        }
        base.len()
    };

    let scored = localizer::score_program(scorer, &stream)?;
    let report = localizer::localize_scored(&scored, k, profile)?;
    let loc = localization_metrics(
        &report,
        &variant.ground_truth_token_indices,
        &variant.ground_truth_line_indices,
    );

    // top-k repair at the known error locations, replace edits only —
    // deletions and insertions have no "original token at this position"
    let positions = final_edit_positions(&variant.edits, base_len);
    let mut replace_sites: Vec<(usize, String)> = Vec::new();
    for (edit, pos) in variant.edits.iter().zip(positions) {
        if edit.op == EditOp::Replace {
            let old = edit.old.clone().ok_or_else(|| {
                CoreError::Precondition("replace edit lacks its original token".into())
            })?;
            replace_sites.push((pos, old));
        }
    }
    replace_sites.sort_by_key(|(p, _)| *p);
    let k_keep = ks.iter().copied().max().unwrap_or(1);
    let (candidates, truth_texts) = if replace_sites.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        let indices: Vec<usize> = replace_sites.iter().map(|(p, _)| *p).collect();
        let masked = mask_tokens(&stream, &indices)?;
        let result = repair_autoregressive(scorer, &masked, k_keep, max_len)?;
        let candidates: Vec<Vec<String>> = result
            .per_mask_candidates
            .iter()
            .map(|cands| cands.iter().map(|c| c.text.clone()).collect())
            .collect();
        let truth_texts: Vec<String> = replace_sites.into_iter().map(|(_, t)| t).collect();
        (candidates, truth_texts)
    };
    let repair_positions = truth_texts.len();
    let topk = repair_topk(&candidates, &truth_texts, ks)?;

    let joint = joint_repair(scorer, &variant.source, correct_source, k, k_keep, max_len, profile);

    let error_classes = variant
        .edits
        .iter()
        .map(|e| classify_edit(e, profile))
        .collect();

    Ok(CaseRecord {
        case_name: variant.case_name.clone(),
        generation: variant.generation,
        loc,
        repair_topk: topk,
        repair_positions,
        full_repair: joint.full_repair,
        codebleu: joint.codebleu,
        error_classes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorClassStats {
    /// Variants containing at least one edit of this class.
    pub count: usize,
    pub full_repair_rate: f64,
}

/// Corpus-level aggregation of per-variant records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub cases: usize,
    pub loc_token_recall: f64,
    pub loc_token_precision: f64,
    pub loc_token_program_hit_rate: f64,
    pub loc_line_recall: f64,
    /// Mean over records that actually had replace positions to rank.
    pub repair_topk: BTreeMap<usize, f64>,
    pub full_repair_rate: f64,
    pub codebleu_mean: f64,
    pub error_breakdown: BTreeMap<String, ErrorClassStats>,
}

/// Mean the per-case records into one summary. Top-k means skip records
/// with no replace edits rather than letting vacuous 1.0s inflate them.
pub fn aggregate(records: &[CaseRecord]) -> Result<EvalMetrics> {
    if records.is_empty() {
        return Err(CoreError::Precondition(
            "cannot aggregate zero evaluation records".into(),
        ));
    }
    let n = records.len() as f64;
    let mean = |f: &dyn Fn(&CaseRecord) -> f64| records.iter().map(|r| f(r)).sum::<f64>() / n;

    let mut repair_topk: BTreeMap<usize, f64> = BTreeMap::new();
    let ranked: Vec<&CaseRecord> = records.iter().filter(|r| r.repair_positions > 0).collect();
    if let Some(first) = ranked.first() {
        for &k in first.repair_topk.keys() {
            let sum: f64 = ranked.iter().map(|r| r.repair_topk[&k]).sum();
            repair_topk.insert(k, sum / ranked.len() as f64);
        }
    }
    let mut prev = 0.0;
    for (_, &acc) in &repair_topk {
        assert!(acc >= prev, "aggregated top-k accuracy must be monotone");
        prev = acc;
    }

    let mut error_breakdown: BTreeMap<String, ErrorClassStats> = BTreeMap::new();
    for class in [
        ErrorClass::OperatorMisuse,
        ErrorClass::VariableMisuse,
        ErrorClass::Literal,
        ErrorClass::ControlFlow,
        ErrorClass::Incomplete,
        ErrorClass::Redundant,
    ] {
        let with: Vec<&CaseRecord> = records
            .iter()
            .filter(|r| r.error_classes.contains(&class))
            .collect();
        if with.is_empty() {
            continue;
        }
        let repaired = with.iter().filter(|r| r.full_repair).count();
        error_breakdown.insert(
            class.label().to_string(),
            ErrorClassStats {
                count: with.len(),
                full_repair_rate: repaired as f64 / with.len() as f64,
            },
        );
    }

    let metrics = EvalMetrics {
        cases: records.len(),
        loc_token_recall: mean(&|r| r.loc.token_recall),
        loc_token_precision: mean(&|r| r.loc.token_precision),
        loc_token_program_hit_rate: mean(&|r| if r.loc.token_program_hit { 1.0 } else { 0.0 }),
        loc_line_recall: mean(&|r| r.loc.line_recall),
        repair_topk,
        full_repair_rate: mean(&|r| if r.full_repair { 1.0 } else { 0.0 }),
        codebleu_mean: mean(&|r| r.codebleu),
        error_breakdown,
    };
    for ratio in [
        metrics.loc_token_recall,
        metrics.loc_token_precision,
        metrics.loc_token_program_hit_rate,
        metrics.loc_line_recall,
        metrics.full_repair_rate,
        metrics.codebleu_mean,
    ] {
        assert!((0.0..=1.0).contains(&ratio), "ratio out of range: {ratio}");
    }
    Ok(metrics)
}

/// Robustness probe: mask a random `fraction` of the *healthy* code tokens
/// and count how many the scorer's top-1 fill restores exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskRestorationOutcome {
    pub masked: usize,
    pub restored: usize,
    pub restoration_rate: f64,
}

pub fn mask_restoration(
    scorer: &dyn Scorer,
    stream: &TokenStream,
    error_token_indices: &[usize],
    fraction: f64,
    seed: u64,
    max_len: usize,
) -> Result<MaskRestorationOutcome> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(CoreError::config("fraction", "must be in (0, 1]"));
    }
    let errors: BTreeSet<usize> = error_token_indices.iter().copied().collect();
    let mut eligible: Vec<usize> = (0..stream.len())
        .filter(|i| stream.token(*i).kind.is_code() && !errors.contains(i))
        .collect();
    if eligible.is_empty() {
        return Err(CoreError::Precondition(
            "no healthy code tokens to mask".into(),
        ));
    }
    let want = ((eligible.len() as f64 * fraction).round() as usize).clamp(1, eligible.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    eligible.shuffle(&mut rng);
    let mut chosen: Vec<usize> = eligible.into_iter().take(want).collect();
    chosen.sort_unstable();

    let masked = mask_tokens(stream, &chosen)?;
    let result = repair_autoregressive(scorer, &masked, 1, max_len)?;
    let restored = masked
        .origin
        .iter()
        .zip(&result.filled_choices)
        .filter(|((_, original), choice)| original == *choice)
        .count();
    Ok(MaskRestorationOutcome {
        masked: chosen.len(),
        restored,
        restoration_rate: restored as f64 / chosen.len() as f64,
    })
}
