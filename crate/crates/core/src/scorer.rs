//! The backend-neutral scoring interface.
//!
//! Anything that can assign log-probabilities to tokens in context — the
//! local n-gram model, a remote completion endpoint, the micro masked LM —
//! implements [`Scorer`]. The localizer, repairer, and injector only talk
//! to this trait.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::tokenizer::TokenStream;

/// One ranked option for filling a gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FillCandidate {
    pub text: String,
    /// Natural-log probability estimate; higher is more likely.
    pub score: f64,
}

pub trait Scorer {
    /// Short backend identifier used in reports ("ngram", "remote", ...).
    fn name(&self) -> &'static str;

    fn can_score(&self) -> bool;

    fn can_fill(&self) -> bool;

    /// One natural-log probability per token of `stream`, in order.
    /// Values must be <= 0; the caller decides which positions count.
    fn score_stream(&self, stream: &TokenStream) -> Result<Vec<f64>>;

    /// Rank up to `k` candidates for a gap with `left` context before it and
    /// `right` context after it, best first. Other masked positions inside
    /// the context windows appear as the literal `<mask>` sentinel text.
    fn fill(&self, left: &[String], right: &[String], k: usize) -> Result<Vec<FillCandidate>>;
}

/// A token stream with per-token log-probabilities attached.
///
/// `unscored[i]` marks positions whose value is a placeholder (layout
/// tokens, comments, the context-free first token); statistics must skip
/// them.
#[derive(Debug, Clone)]
pub struct ScoredProgram {
    pub stream: TokenStream,
    pub logprobs: Vec<f64>,
    pub unscored: Vec<bool>,
}

impl ScoredProgram {
    pub fn new(stream: TokenStream, logprobs: Vec<f64>, unscored: Vec<bool>) -> Result<Self> {
        if logprobs.len() != stream.len() || unscored.len() != stream.len() {
            return Err(CoreError::Precondition(format!(
                "scored program shape mismatch: {} tokens, {} logprobs, {} flags",
                stream.len(),
                logprobs.len(),
                unscored.len()
            )));
        }
        for (i, (&lp, &skip)) in logprobs.iter().zip(&unscored).enumerate() {
            if !skip && (!lp.is_finite() || lp > 0.0) {
                return Err(CoreError::Precondition(format!(
                    "log-probability at position {i} is {lp}; scored values must be finite and <= 0"
                )));
            }
        }
        Ok(ScoredProgram {
            stream,
            logprobs,
            unscored,
        })
    }

    /// Indices whose values participate in statistics.
    pub fn scored_indices(&self) -> Vec<usize> {
        (0..self.stream.len())
            .filter(|&i| !self.unscored[i])
            .collect()
    }
}
