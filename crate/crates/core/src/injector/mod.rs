//! Logical-error injection: breed buggy-but-runnable variants of a correct
//! program by masking single tokens and refilling them with plausible
//! alternatives.
//!
//! The loop is breadth-wise. Every generation takes each surviving variant,
//! applies one random edit (replace / delete / insert, weighted draw), asks
//! the scorer for fill candidates where a fill is needed, classifies all
//! offspring against the case's tests, and keeps only the ones that still
//! run but answer wrongly. Offspring are capped per generation, preferring
//! the *lowest* fill scores — the least expected token that still parses is
//! the most interesting bug.
//!
//! Edits must disperse: no edit may land in a program's first or last
//! chunk of `chunk_size` tokens, nor in a chunk already owned by an earlier
//! edit of the same lineage. [`verify_dispersion`] replays an edit list and
//! checks exactly that, so reports can be audited after the fact.

pub mod cases;
pub mod runner;

use std::collections::{BTreeSet, HashSet};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::profile::{load_profile, LexProfile};
use crate::repairer::{context_window, MASK_SENTINEL};
use crate::scorer::Scorer;
use crate::tokenizer::{detokenize, tokenize, TokenKind, TokenStream};

pub use cases::{load_case, load_cases, ProgramCase};
pub use runner::{classify, classify_batch, Classification, RunnerConfig, TestSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditOp {
    Replace,
    Delete,
    Insert,
}

/// One applied edit, in the coordinates of the stream it was applied to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditRecord {
    pub op: EditOp,
    /// Token index at application time (before any later edit shifts it).
    pub index: usize,
    /// Original token text (`Replace`/`Delete`).
    pub old: Option<String>,
    /// Substituted token text (`Replace`/`Insert`, once filled).
    pub new: Option<String>,
}

/// Relative draw weights for the three edit operations.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MaskWeights {
    pub replace: f64,
    pub delete: f64,
    pub insert: f64,
}

impl Default for MaskWeights {
    fn default() -> Self {
        MaskWeights {
            replace: 1.0,
            delete: 1.0,
            insert: 1.0,
        }
    }
}

impl MaskWeights {
    fn validate(&self) -> Result<()> {
        let ws = [self.replace, self.delete, self.insert];
        if ws.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(CoreError::config(
                "weights",
                "must be finite and non-negative",
            ));
        }
        if ws.iter().sum::<f64>() <= 0.0 {
            return Err(CoreError::config("weights", "must not all be zero"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InjectorConfig {
    /// Token-chunk granularity for edit dispersion.
    pub chunk_size: usize,
    /// Upper bound on breeding rounds; also the max edits per variant.
    pub max_generations: usize,
    /// Keep at most this many survivors per generation (lowest score first).
    pub per_gen_cap: usize,
    /// Independent mask draws per parent per generation. One draw can land
    /// on a token whose every substitution breaks the parse; a few more
    /// tries make a generation far less likely to die on bad luck.
    pub mask_attempts: usize,
    /// Fill candidates requested per mask.
    pub top_m: usize,
    /// Context-window budget handed to the scorer.
    pub max_len: usize,
    pub seed: u64,
    pub weights: MaskWeights,
    /// Parallel classification workers.
    pub jobs: usize,
}

impl Default for InjectorConfig {
    fn default() -> Self {
        InjectorConfig {
            chunk_size: 20,
            max_generations: 3,
            per_gen_cap: 8,
            mask_attempts: 4,
            top_m: 10,
            max_len: 512,
            seed: 0,
            weights: MaskWeights::default(),
            jobs: 1,
        }
    }
}

impl InjectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chunk_size == 0 {
            return Err(CoreError::config("chunk_size", "must be at least 1"));
        }
        if self.per_gen_cap == 0 {
            return Err(CoreError::config("per_gen_cap", "must be at least 1"));
        }
        if self.mask_attempts == 0 {
            return Err(CoreError::config("mask_attempts", "must be at least 1"));
        }
        if self.top_m == 0 {
            return Err(CoreError::config("top_m", "must be at least 1"));
        }
        if self.max_len < 3 {
            return Err(CoreError::config("max_len", "must be at least 3"));
        }
        self.weights.validate()
    }
}

/// One emitted buggy variant plus everything needed to audit it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectionVariant {
    pub case_name: String,
    pub source: String,
    /// Edits in application order, each in its application-time coordinates.
    pub edits: Vec<EditRecord>,
    /// 1-based breeding round that produced this variant (== edits.len()).
    pub generation: usize,
    /// Edit sites mapped into the final token stream.
    pub ground_truth_token_indices: Vec<usize>,
    /// Source lines (0-based) containing the edit sites.
    pub ground_truth_line_indices: Vec<usize>,
    pub classification: Classification,
    /// Fill score of the newest edit; deletions score 0.
    pub score: f64,
}

fn chunk_of(index: usize, chunk_size: usize) -> usize {
    index / chunk_size
}

fn last_chunk(len: usize, chunk_size: usize) -> usize {
    if len == 0 {
        0
    } else {
        chunk_of(len - 1, chunk_size)
    }
}

/// Map prior ground-truth positions through one edit and append the edit's
/// own marker. Inserting at `p` shifts positions ≥ p up; deleting at `p`
/// shifts positions > p down and marks the survivor now sitting at the gap.
pub fn advance_truth(prior: &[usize], edit: &EditRecord, len_after: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(prior.len() + 1);
    for &t in prior {
        match edit.op {
            EditOp::Replace => out.push(t),
            EditOp::Insert => out.push(if t >= edit.index { t + 1 } else { t }),
            EditOp::Delete => {
                if t > edit.index {
                    out.push(t - 1);
                } else if t < edit.index {
                    out.push(t);
                }
                // t == edit.index: that token is gone; its marker is re-added below
            }
        }
    }
    let marker = match edit.op {
        EditOp::Replace | EditOp::Insert => edit.index,
        EditOp::Delete => edit.index.min(len_after.saturating_sub(1)),
    };
    out.push(marker);
    out.sort_unstable();
    out.dedup();
    out
}

/// Where each edit's marker sits in the *final* stream, one entry per edit
/// in application order. The sorted, deduplicated union of these equals the
/// variant's `ground_truth_token_indices`; keeping them per-edit lets an
/// evaluator pair a final position back with its edit record.
pub fn final_edit_positions(edits: &[EditRecord], base_len: usize) -> Vec<usize> {
    let mut positions: Vec<usize> = Vec::with_capacity(edits.len());
    let mut len = base_len;
    for edit in edits {
        len = match edit.op {
            EditOp::Replace => len,
            EditOp::Delete => len - 1,
            EditOp::Insert => len + 1,
        };
        for p in positions.iter_mut() {
            match edit.op {
                EditOp::Replace => {}
                EditOp::Insert => {
                    if *p >= edit.index {
                        *p += 1;
                    }
                }
                EditOp::Delete => {
                    if *p > edit.index {
                        *p -= 1;
                    }
                }
            }
        }
        positions.push(match edit.op {
            EditOp::Replace | EditOp::Insert => edit.index,
            EditOp::Delete => edit.index.min(len.saturating_sub(1)),
        });
    }
    positions
}

/// Chunks an edit may not touch: the first chunk, the last chunk, and every
/// chunk already containing a ground-truth position.
fn blocked_chunks(len: usize, truth: &[usize], chunk_size: usize) -> BTreeSet<usize> {
    let mut blocked: BTreeSet<usize> = BTreeSet::new();
    blocked.insert(0);
    blocked.insert(last_chunk(len, chunk_size));
    for &t in truth {
        blocked.insert(chunk_of(t, chunk_size));
    }
    blocked
}

/// Post-edit sanity: all truth positions sit in pairwise-distinct chunks,
/// none in the first or last chunk of the edited stream. Deletions can
/// drag a later edit site across a chunk boundary, so this is checked
/// after every edit rather than assumed from the sampling filter.
fn truth_dispersed(truth: &[usize], len: usize, chunk_size: usize) -> bool {
    let last = last_chunk(len, chunk_size);
    let mut seen = BTreeSet::new();
    for &t in truth {
        let c = chunk_of(t, chunk_size);
        if c == 0 || c == last || !seen.insert(c) {
            return false;
        }
    }
    true
}

/// Replay an edit list against a virtual stream of `base_len` tokens and
/// check the dispersion rules the injector promises: every edit lands
/// outside the first/last chunk and outside chunks owned by earlier edits,
/// and after each step the adjusted truth set stays chunk-disjoint.
pub fn verify_dispersion(base_len: usize, edits: &[EditRecord], chunk_size: usize) -> bool {
    if chunk_size == 0 {
        return false;
    }
    let mut len = base_len;
    let mut truth: Vec<usize> = Vec::new();
    for edit in edits {
        let in_range = match edit.op {
            EditOp::Insert => edit.index >= 1 && edit.index < len,
            _ => edit.index < len,
        };
        if !in_range {
            return false;
        }
        if blocked_chunks(len, &truth, chunk_size).contains(&chunk_of(edit.index, chunk_size)) {
            return false;
        }
        len = match edit.op {
            EditOp::Replace => len,
            EditOp::Delete => len - 1,
            EditOp::Insert => len + 1,
        };
        truth = advance_truth(&truth, edit, len);
        if !truth_dispersed(&truth, len, chunk_size) {
            return false;
        }
    }
    true
}

/// Draw one edit: pick the operation by weight, then a site uniformly among
/// the code tokens outside `blocked` chunks. Returns the edited stream — a
/// sentinel for `Replace`/`Insert`, the token removed for `Delete` — or
/// `None` when the chosen operation has no legal site.
pub fn random_mask<R: Rng>(
    stream: &TokenStream,
    rng: &mut R,
    weights: &MaskWeights,
    chunk_size: usize,
    blocked: &BTreeSet<usize>,
) -> Option<(TokenStream, EditRecord)> {
    weights.validate().ok()?;
    let total = weights.replace + weights.delete + weights.insert;
    let draw = rng.random_range(0.0..total);
    let op = if draw < weights.replace {
        EditOp::Replace
    } else if draw < weights.replace + weights.delete {
        EditOp::Delete
    } else {
        EditOp::Insert
    };

    let sites: Vec<usize> = match op {
        EditOp::Replace | EditOp::Delete => (0..stream.len())
            .filter(|&i| {
                stream.token(i).kind.is_code() && !blocked.contains(&chunk_of(i, chunk_size))
            })
            .collect(),
        // an insertion site p puts the new token just before the code token
        // currently at p; p ≥ 1 keeps the very first token untouched
        EditOp::Insert => (1..stream.len())
            .filter(|&p| {
                stream.token(p).kind.is_code() && !blocked.contains(&chunk_of(p, chunk_size))
            })
            .collect(),
    };
    if sites.is_empty() {
        return None;
    }
    let site = sites[rng.random_range(0..sites.len())];

    let mut edited = stream.clone();
    let record = match op {
        EditOp::Replace => {
            let old = edited.token(site).text.clone();
            edited.replace_text(site, MASK_SENTINEL);
            EditRecord {
                op,
                index: site,
                old: Some(old),
                new: None,
            }
        }
        EditOp::Delete => {
            let removed = edited.remove(site);
            EditRecord {
                op,
                index: site,
                old: Some(removed.text),
                new: None,
            }
        }
        EditOp::Insert => {
            edited.insert(site, MASK_SENTINEL, TokenKind::Ident);
            EditRecord {
                op,
                index: site,
                old: None,
                new: None,
            }
        }
    };
    Some((edited, record))
}

/// True when the stream's text round-trips through the lexer unchanged —
/// the edit didn't smear tokens together or split one apart.
fn relex_clean(stream: &TokenStream, profile: &LexProfile) -> bool {
    let source = detokenize(stream);
    tokenize(&source, profile).texts() == stream.texts()
}

/// Resolve a masked stream into concrete variants: ask the scorer for
/// `top_m` candidates at the sentinel, order them ascending by score (least
/// expected first), and keep the ones that lex as a single code token and
/// leave the whole program re-lexable. The original token never comes back.
pub fn fill_variants(
    scorer: &dyn Scorer,
    masked: &TokenStream,
    edit: &EditRecord,
    top_m: usize,
    max_len: usize,
    profile: &LexProfile,
) -> Result<Vec<(TokenStream, EditRecord, f64)>> {
    let sentinels: Vec<usize> = (0..masked.len())
        .filter(|&i| masked.token(i).text == MASK_SENTINEL)
        .collect();
    if sentinels != [edit.index] {
        return Err(CoreError::Precondition(format!(
            "fill_variants wants exactly one sentinel at {}, found {:?}",
            edit.index, sentinels
        )));
    }

    let (left, right, _) = context_window(masked, edit.index, max_len);
    let mut candidates = scorer.fill(&left, &right, top_m)?;
    candidates.sort_by(|a, b| {
        a.score
            .total_cmp(&b.score)
            .then_with(|| a.text.cmp(&b.text))
    });

    let mut out = Vec::new();
    for cand in candidates {
        if edit.old.as_deref() == Some(cand.text.as_str()) {
            continue; // that would undo the edit
        }
        let alone = tokenize(&cand.text, profile);
        if alone.len() != 1 || !alone.token(0).kind.is_code() {
            continue;
        }
        let mut filled = masked.clone();
        filled.replace_text(edit.index, &cand.text);
        if !relex_clean(&filled, profile) {
            continue;
        }
        let mut record = edit.clone();
        record.new = Some(cand.text.clone());
        out.push((filled, record, cand.score));
    }
    Ok(out)
}

struct Lineage {
    stream: TokenStream,
    source: String,
    edits: Vec<EditRecord>,
    truth: Vec<usize>,
}

/// Breed logical-error variants of `case.correct_source`.
///
/// Comments are stripped first so every surviving token is fair game. The
/// pristine program must pass its own tests; anything else is a broken case,
/// not an injection result. Emitted variants have already been re-classified
/// once — a verdict that does not reproduce drops the variant.
pub fn generate(
    scorer: &dyn Scorer,
    case: &ProgramCase,
    runner: &RunnerConfig,
    config: &InjectorConfig,
) -> Result<Vec<InjectionVariant>> {
    config.validate()?;
    runner.validate()?;
    let profile = load_profile(&case.profile_name)?;

    let mut base = tokenize(&case.correct_source, &profile);
    for i in (0..base.len()).rev() {
        if base.token(i).kind == TokenKind::Comment {
            base.remove(i);
        }
    }
    let base_source = detokenize(&base);
    if !relex_clean(&base, &profile) {
        return Err(CoreError::Precondition(format!(
            "case `{}` does not survive comment stripping",
            case.name
        )));
    }
    match classify(runner, &base_source, &case.tests)? {
        Classification::Passes => {}
        verdict => {
            return Err(CoreError::Precondition(format!(
                "case `{}` baseline classifies as {:?}, expected a pass",
                case.name, verdict
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut seen: HashSet<String> = HashSet::new();
    seen.insert(base_source.clone());

    let mut parents = vec![Lineage {
        stream: base,
        source: base_source,
        edits: Vec::new(),
        truth: Vec::new(),
    }];
    let mut emitted: Vec<InjectionVariant> = Vec::new();

    for generation in 1..=config.max_generations {
        let mut offspring: Vec<(Lineage, f64)> = Vec::new();
        for parent in &parents {
            let blocked = blocked_chunks(parent.stream.len(), &parent.truth, config.chunk_size);
            for _attempt in 0..config.mask_attempts {
                let Some((masked, edit)) = random_mask(
                    &parent.stream,
                    &mut rng,
                    &config.weights,
                    config.chunk_size,
                    &blocked,
                ) else {
                    continue;
                };

                let resolved: Vec<(TokenStream, EditRecord, f64)> = if edit.op == EditOp::Delete {
                    if relex_clean(&masked, &profile) {
                        vec![(masked, edit, 0.0)]
                    } else {
                        Vec::new()
                    }
                } else {
                    fill_variants(
                        scorer,
                        &masked,
                        &edit,
                        config.top_m,
                        config.max_len,
                        &profile,
                    )?
                };

                for (stream, record, score) in resolved {
                    let truth = advance_truth(&parent.truth, &record, stream.len());
                    if !truth_dispersed(&truth, stream.len(), config.chunk_size) {
                        continue;
                    }
                    let source = detokenize(&stream);
                    if !seen.insert(source.clone()) {
                        continue;
                    }
                    let mut edits = parent.edits.clone();
                    edits.push(record);
                    offspring.push((
                        Lineage {
                            stream,
                            source,
                            edits,
                            truth,
                        },
                        score,
                    ));
                }
            }
        }
        if offspring.is_empty() {
            break;
        }

        let sources: Vec<String> = offspring.iter().map(|(l, _)| l.source.clone()).collect();
        let verdicts = classify_batch(runner, &sources, &case.tests, config.jobs)
            .into_iter()
            .collect::<Result<Vec<_>>>()?;

        let mut survivors: Vec<(usize, Classification)> = verdicts
            .into_iter()
            .enumerate()
            .filter(|(_, v)| v.is_logical())
            .collect();
        survivors.sort_by(|a, b| {
            offspring[a.0]
                .1
                .total_cmp(&offspring[b.0].1)
                .then(a.0.cmp(&b.0))
        });
        survivors.truncate(config.per_gen_cap);
        survivors.sort_by_key(|(i, _)| *i);

        let keep: BTreeSet<usize> = survivors.iter().map(|(i, _)| *i).collect();
        let mut next_parents = Vec::new();
        let mut verdict_of = survivors
            .into_iter()
            .collect::<std::collections::BTreeMap<_, _>>();
        for (i, (lineage, score)) in offspring.into_iter().enumerate() {
            if !keep.contains(&i) {
                continue;
            }
            let relexed = tokenize(&lineage.source, &profile);
            let lines: BTreeSet<usize> = lineage
                .truth
                .iter()
                .map(|&t| relexed.token(t).line)
                .collect();
            emitted.push(InjectionVariant {
                case_name: case.name.clone(),
                source: lineage.source.clone(),
                edits: lineage.edits.clone(),
                generation,
                ground_truth_token_indices: lineage.truth.clone(),
                ground_truth_line_indices: lines.into_iter().collect(),
                classification: verdict_of.remove(&i).expect("kept index has a verdict"),
                score,
            });
            next_parents.push(lineage);
        }
        parents = next_parents;
        if parents.is_empty() {
            break;
        }
    }

    // Soundness sweep: every emitted verdict must reproduce exactly.
    if !emitted.is_empty() {
        let sources: Vec<String> = emitted.iter().map(|v| v.source.clone()).collect();
        let reruns = classify_batch(runner, &sources, &case.tests, config.jobs)
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let mut kept = Vec::with_capacity(emitted.len());
        for (variant, rerun) in emitted.into_iter().zip(reruns) {
            if rerun == variant.classification {
                kept.push(variant);
            }
        }
        emitted = kept;
    }
    Ok(emitted)
}
