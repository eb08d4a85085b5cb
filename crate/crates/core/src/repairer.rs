//! Mask-and-fill repair.
//!
//! Flagged tokens are replaced by the `<mask>` sentinel, then filled strictly
//! left to right: each mask's top-1 candidate is substituted into the program
//! before the next mask's context is computed, so later fills condition on
//! earlier repairs. Masks still pending appear to the scorer as sentinel
//! tokens inside the context window.
//!
//! Filling only rewrites token *texts*. Callers that need token kinds after a
//! repair (for anything beyond detokenization) should re-lex the result.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::scorer::{FillCandidate, Scorer};
use crate::tokenizer::TokenStream;
use crate::vocab::MASK;

/// Sentinel text standing in for a masked token.
pub const MASK_SENTINEL: &str = MASK;

/// Default context-window budget (tokens, mask included).
pub const DEFAULT_MAX_LEN: usize = 512;

#[derive(Debug, Clone)]
pub struct MaskedProgram {
    pub stream: TokenStream,
    /// Ascending indices of sentinel tokens.
    pub mask_positions: Vec<usize>,
    /// Original text of each masked position, for evaluation only.
    pub origin: Vec<(usize, String)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepairResult {
    pub repaired_stream: TokenStream,
    /// Ranked candidate list recorded per mask, in mask order.
    pub per_mask_candidates: Vec<Vec<FillCandidate>>,
    /// The token text substituted at each mask, in mask order.
    pub filled_choices: Vec<String>,
    /// Token-index window `[start, end)` each fill was computed over.
    pub window_spans: Vec<(usize, usize)>,
}

/// Replace the tokens at `indices` with the sentinel.
pub fn mask_tokens(stream: &TokenStream, indices: &[usize]) -> Result<MaskedProgram> {
    let mut positions: Vec<usize> = indices.to_vec();
    positions.sort_unstable();
    for pair in positions.windows(2) {
        if pair[0] == pair[1] {
            return Err(CoreError::Precondition(format!(
                "duplicate mask index {}",
                pair[0]
            )));
        }
    }
    if let Some(&bad) = positions.iter().find(|&&i| i >= stream.len()) {
        return Err(CoreError::Precondition(format!(
            "mask index {bad} out of range for {}-token stream",
            stream.len()
        )));
    }
    for (i, tok) in stream.tokens().iter().enumerate() {
        if tok.text == MASK_SENTINEL && !positions.contains(&i) {
            return Err(CoreError::Precondition(format!(
                "stream already contains the sentinel at index {i}"
            )));
        }
    }
    let mut masked = stream.clone();
    let mut origin = Vec::with_capacity(positions.len());
    for &i in &positions {
        origin.push((i, stream.token(i).text.clone()));
        masked.replace_text(i, MASK_SENTINEL);
    }
    Ok(MaskedProgram {
        stream: masked,
        mask_positions: positions,
        origin,
    })
}

/// Window arithmetic shared by `windowed_context` and the repair loop:
/// budget `max_len - 1` split evenly around the position, with whichever
/// side hits the stream boundary donating its surplus to the other.
fn window_bounds(len: usize, position: usize, max_len: usize) -> (usize, usize) {
    let budget = max_len - 1;
    let avail_left = position;
    let avail_right = len - position - 1;
    let left = avail_left.min(budget / 2);
    let right = avail_right.min(budget - left);
    let left = avail_left.min(budget - right);
    (position - left, position + right + 1)
}

/// Left/right context texts and the `[start, end)` token window around
/// `position`, honouring the `max_len` budget. Shared with the injector,
/// which windows plain streams rather than `MaskedProgram`s.
pub fn context_window(
    stream: &TokenStream,
    position: usize,
    max_len: usize,
) -> (Vec<String>, Vec<String>, (usize, usize)) {
    let (start, end) = window_bounds(stream.len(), position, max_len);
    let texts = stream.tokens();
    let left = texts[start..position].iter().map(|t| t.text.clone()).collect();
    let right = texts[position + 1..end].iter().map(|t| t.text.clone()).collect();
    (left, right, (start, end))
}

/// Left/right context texts around a mask, at most `max_len` tokens in total
/// including the mask itself.
pub fn windowed_context(
    masked: &MaskedProgram,
    position: usize,
    max_len: usize,
) -> Result<(Vec<String>, Vec<String>)> {
    if max_len < 3 {
        return Err(CoreError::Precondition(format!(
            "max_len {max_len} leaves no room for context around the mask"
        )));
    }
    if !masked.mask_positions.contains(&position) {
        return Err(CoreError::Precondition(format!(
            "index {position} is not a mask position"
        )));
    }
    let (left, right, _) = context_window(&masked.stream, position, max_len);
    Ok((left, right))
}

/// Ranked fill candidates for one mask, over its windowed context.
pub fn fill_one(
    scorer: &dyn Scorer,
    masked: &MaskedProgram,
    position: usize,
    k: usize,
    max_len: usize,
) -> Result<Vec<FillCandidate>> {
    if !scorer.can_fill() {
        return Err(CoreError::Precondition(format!(
            "scorer `{}` cannot fill masks",
            scorer.name()
        )));
    }
    let (left, right) = windowed_context(masked, position, max_len)?;
    scorer.fill(&left, &right, k)
}

/// Fill every mask left to right, substituting each top-1 choice before
/// computing the next context. Keeps the top `k_keep` candidates per mask.
pub fn repair_autoregressive(
    scorer: &dyn Scorer,
    masked: &MaskedProgram,
    k_keep: usize,
    max_len: usize,
) -> Result<RepairResult> {
    if !scorer.can_fill() {
        return Err(CoreError::Precondition(format!(
            "scorer `{}` cannot fill masks",
            scorer.name()
        )));
    }
    if max_len < 3 {
        return Err(CoreError::Precondition(format!(
            "max_len {max_len} leaves no room for context around the mask"
        )));
    }
    let mut stream = masked.stream.clone();
    let mut per_mask_candidates = Vec::with_capacity(masked.mask_positions.len());
    let mut filled_choices = Vec::with_capacity(masked.mask_positions.len());
    let mut window_spans = Vec::with_capacity(masked.mask_positions.len());
    for &position in &masked.mask_positions {
        let (left, right, span) = context_window(&stream, position, max_len);
        let candidates = scorer.fill(&left, &right, k_keep).map_err(|e| CoreError::Scorer {
            position,
            message: e.to_string(),
        })?;
        let choice = match candidates.first() {
            Some(c) => c.text.clone(),
            None => {
                return Err(CoreError::Scorer {
                    position,
                    message: "scorer returned no candidates".into(),
                })
            }
        };
        stream.replace_text(position, &choice);
        per_mask_candidates.push(candidates);
        filled_choices.push(choice);
        window_spans.push(span);
    }
    debug_assert!(stream.tokens().iter().all(|t| t.text != MASK_SENTINEL));
    Ok(RepairResult {
        repaired_stream: stream,
        per_mask_candidates,
        filled_choices,
        window_spans,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Corpus, CorpusFile};
    use crate::ngram::{train_ngram, NGramConfig, Smoothing};
    use crate::profile::load_profile;
    use crate::tokenizer::tokenize;
    use proptest::prelude::*;
    use std::cell::RefCell;
    use std::path::PathBuf;

    fn stream_of(text: &str) -> TokenStream {
        tokenize(text, &load_profile("python-like").unwrap())
    }

    /// Scorer that replays scripted candidate lists and records the contexts
    /// it was asked about.
    struct Scripted {
        responses: RefCell<Vec<Vec<FillCandidate>>>,
        calls: RefCell<Vec<(Vec<String>, Vec<String>)>>,
    }

    impl Scripted {
        fn new(responses: Vec<Vec<&str>>) -> Self {
            Scripted {
                responses: RefCell::new(
                    responses
                        .into_iter()
                        .rev() // pop() serves them front-first
                        .map(|texts| {
                            texts
                                .iter()
                                .enumerate()
                                .map(|(i, t)| FillCandidate {
                                    text: t.to_string(),
                                    score: -(i as f64),
                                })
                                .collect()
                        })
                        .collect(),
                ),
                calls: RefCell::new(Vec::new()),
            }
        }
    }

    impl Scorer for Scripted {
        fn name(&self) -> &'static str {
            "scripted"
        }
        fn can_score(&self) -> bool {
            false
        }
        fn can_fill(&self) -> bool {
            true
        }
        fn score_stream(&self, _: &TokenStream) -> Result<Vec<f64>> {
            Err(CoreError::Precondition("no scoring".into()))
        }
        fn fill(&self, left: &[String], right: &[String], k: usize) -> Result<Vec<FillCandidate>> {
            self.calls.borrow_mut().push((left.to_vec(), right.to_vec()));
            let mut next = self
                .responses
                .borrow_mut()
                .pop()
                .expect("script exhausted");
            next.truncate(k);
            Ok(next)
        }
    }

    #[test]
    fn masking_replaces_exactly_the_requested_tokens() {
        let stream = stream_of("n ^= n - 1");
        let masked = mask_tokens(&stream, &[1]).unwrap();
        assert_eq!(masked.stream.texts(), vec!["n", "<mask>", "n", "-", "1"]);
        assert_eq!(masked.mask_positions, vec![1]);
        assert_eq!(masked.origin, vec![(1, "^=".to_string())]);
        // round trip still detokenizes with original spacing
        assert_eq!(crate::tokenizer::detokenize(&masked.stream), "n <mask> n - 1");
    }

    #[test]
    fn empty_mask_list_is_identity() {
        let stream = stream_of("x = 1");
        let masked = mask_tokens(&stream, &[]).unwrap();
        assert_eq!(masked.stream.texts(), stream.texts());
        assert!(masked.mask_positions.is_empty());
        let result = repair_autoregressive(&Scripted::new(vec![]), &masked, 5, 512).unwrap();
        assert_eq!(result.repaired_stream.texts(), stream.texts());
        assert!(result.filled_choices.is_empty());
    }

    #[test]
    fn bad_indices_rejected() {
        let stream = stream_of("a b c d e");
        assert!(matches!(
            mask_tokens(&stream, &[99]),
            Err(CoreError::Precondition(_))
        ));
        assert!(matches!(
            mask_tokens(&stream, &[1, 1]),
            Err(CoreError::Precondition(_))
        ));
    }

    #[test]
    fn preexisting_sentinel_rejected() {
        // "<mask>" lexes to several tokens, so plant the sentinel directly
        let mut stream = stream_of("a x b");
        stream.replace_text(1, MASK_SENTINEL);
        assert!(matches!(
            mask_tokens(&stream, &[2]),
            Err(CoreError::Precondition(_))
        ));
    }

    #[test]
    fn window_covers_short_streams_entirely() {
        let stream = stream_of("a b c d e f g h i j");
        let masked = mask_tokens(&stream, &[5]).unwrap();
        let (left, right) = windowed_context(&masked, 5, 512).unwrap();
        assert_eq!(left.len(), 5);
        assert_eq!(right.len(), 4);
    }

    #[test]
    fn window_centering_matches_brute_force() {
        let text = (0..1000).map(|i| format!("t{i}")).collect::<Vec<_>>().join(" ");
        let stream = tokenize(&text, &load_profile("mini").unwrap());
        let masked = mask_tokens(&stream, &[500]).unwrap();
        let (left, right) = windowed_context(&masked, 500, 512).unwrap();
        assert_eq!((left.len(), right.len()), (255, 256));
        let texts = masked.stream.texts();
        assert_eq!(left, texts[245..500].to_vec());
        assert_eq!(right, texts[501..757].to_vec());
    }

    #[test]
    fn window_shifts_at_the_edges() {
        let text = (0..100).map(|i| format!("t{i}")).collect::<Vec<_>>().join(" ");
        let stream = tokenize(&text, &load_profile("mini").unwrap());
        // at the start: empty left, right takes the whole budget
        let masked = mask_tokens(&stream, &[0]).unwrap();
        let (left, right) = windowed_context(&masked, 0, 11).unwrap();
        assert!(left.is_empty());
        assert_eq!(right.len(), 10);
        // at the end: left takes the whole budget
        let masked = mask_tokens(&stream, &[99]).unwrap();
        let (left, right) = windowed_context(&masked, 99, 11).unwrap();
        assert_eq!(left.len(), 10);
        assert!(right.is_empty());
        // tiny max_len still keeps the mask
        let masked = mask_tokens(&stream, &[50]).unwrap();
        let (left, right) = windowed_context(&masked, 50, 3).unwrap();
        assert_eq!((left.len(), right.len()), (1, 1));
        assert!(matches!(
            windowed_context(&masked, 50, 2),
            Err(CoreError::Precondition(_))
        ));
    }

    #[test]
    fn fill_one_uses_ngram_candidates() {
        let profile = load_profile("mini").unwrap();
        let corpus = Corpus {
            files: vec![CorpusFile {
                path: PathBuf::from("mem"),
                stream: tokenize("a b a b", &profile),
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
        let stream = tokenize("a x", &profile);
        let masked = mask_tokens(&stream, &[1]).unwrap();
        let candidates = fill_one(&model, &masked, 1, 1, 512).unwrap();
        assert_eq!(candidates[0].text, "b");
        // k larger than the scorer's vocab just clamps
        let all = fill_one(&model, &masked, 1, 10, 512).unwrap();
        assert_eq!(all.len(), 2);
    }

    #[test]
    fn autoregressive_fill_feeds_choices_forward() {
        // two masks: the second fill must see the first fill's result
        let stream = stream_of("n ^= n -= 1");
        let masked = mask_tokens(&stream, &[1, 3]).unwrap();
        assert_eq!(masked.stream.texts(), vec!["n", "<mask>", "n", "<mask>", "1"]);
        let scorer = Scripted::new(vec![vec!["&", "|"], vec!["+=", "-="]]);
        let result = repair_autoregressive(&scorer, &masked, 2, 512).unwrap();
        assert_eq!(result.repaired_stream.texts(), vec!["n", "&", "n", "+=", "1"]);
        assert_eq!(result.filled_choices, vec!["&", "+="]);
        let calls = scorer.calls.borrow();
        // first call: left [n], right still shows the pending sentinel
        assert_eq!(calls[0].0, vec!["n"]);
        assert_eq!(calls[0].1, vec!["n", "<mask>", "1"]);
        // second call: left contains the substituted "&"
        assert_eq!(calls[1].0, vec!["n", "&", "n"]);
        assert_eq!(calls[1].1, vec!["1"]);
        assert_eq!(result.window_spans, vec![(0, 5), (0, 5)]);
        assert_eq!(result.per_mask_candidates[0].len(), 2);
    }

    #[test]
    fn earlier_masks_never_depend_on_later_script_entries() {
        let stream = stream_of("a b c d e");
        let masked = mask_tokens(&stream, &[1, 3]).unwrap();
        let run = |second: &'static str| {
            let scorer = Scripted::new(vec![vec!["X", "Y"], vec![second]]);
            repair_autoregressive(&scorer, &masked, 2, 512).unwrap()
        };
        let r1 = run("P");
        let r2 = run("Q");
        assert_eq!(r1.per_mask_candidates[0], r2.per_mask_candidates[0]);
        assert_eq!(r1.filled_choices[0], r2.filled_choices[0]);
        assert_ne!(r1.filled_choices[1], r2.filled_choices[1]);
    }

    #[test]
    fn scorer_failure_reports_the_position() {
        let stream = stream_of("a b c");
        let masked = mask_tokens(&stream, &[2]).unwrap();
        let scorer = Scripted::new(vec![vec![]]); // empty candidate list
        match repair_autoregressive(&scorer, &masked, 3, 512).unwrap_err() {
            CoreError::Scorer { position, .. } => assert_eq!(position, 2),
            other => panic!("unexpected error {other}"),
        }
    }

    proptest! {
        #[test]
        fn window_never_exceeds_budget(
            len in 1usize..800,
            pos_frac in 0.0f64..1.0,
            max_len in 3usize..600,
        ) {
            let position = ((len - 1) as f64 * pos_frac) as usize;
            let (start, end) = window_bounds(len, position, max_len);
            prop_assert!(start <= position && position < end);
            prop_assert!(end <= len);
            prop_assert!(end - start <= max_len);
            // budget is used fully whenever the stream allows it
            if len >= max_len {
                prop_assert_eq!(end - start, max_len);
            } else {
                prop_assert_eq!((start, end), (0, len));
            }
        }
    }
}
