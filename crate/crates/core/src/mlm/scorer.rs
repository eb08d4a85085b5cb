//! The `Scorer` face of a trained model.
//!
//! A masked model scores a token by masking it out and measuring how much
//! probability flows back to the original text — the pseudo-log-likelihood
//! convention. Long streams are scored through a sliding context window so
//! any program fits the model's length budget, and filling reuses the same
//! single-slot forward pass.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::repairer::context_window;
use crate::scorer::{FillCandidate, Scorer};
use crate::tokenizer::TokenStream;
use crate::vocab::{Vocab, MASK_ID};

use super::{MicroMlm, PROB_FLOOR};

/// Fixed seed for the rng that draws prompt offsets under the `random`
/// placement; scoring must be reproducible run to run.
const SCORING_SEED: u64 = 0x6d6c_6d73;

/// A trained model paired with the text vocabulary it was trained against.
#[derive(Debug, Clone)]
pub struct MlmScorer {
    model: MicroMlm,
    vocab: Vocab,
}

impl MlmScorer {
    pub fn new(model: MicroMlm, vocab: Vocab) -> Result<Self> {
        if model.dims.vocab != vocab.len() {
            return Err(CoreError::config(
                "vocab",
                format!(
                    "model expects {} vocabulary entries, got {}",
                    model.dims.vocab,
                    vocab.len()
                ),
            ));
        }
        Ok(MlmScorer { model, vocab })
    }

    pub fn model(&self) -> &MicroMlm {
        &self.model
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    /// Text tokens the model can attend to at once, slot included.
    fn window_budget(&self) -> Result<usize> {
        let budget = self
            .model
            .dims
            .max_len
            .saturating_sub(self.model.dims.prompt_len);
        if budget < 2 {
            return Err(CoreError::config(
                "prompt_length",
                "prompt leaves no room for text within max_len",
            ));
        }
        Ok(budget)
    }

    fn floored_ln(p: f64) -> f64 {
        let p = if p < PROB_FLOOR { PROB_FLOOR } else { p };
        p.ln().min(0.0)
    }

    /// Vocabulary distribution for one masked slot between id contexts.
    fn slot_probs(
        &self,
        left: &[usize],
        right: &[usize],
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<f64>> {
        let mut ids = Vec::with_capacity(left.len() + 1 + right.len());
        ids.extend_from_slice(left);
        ids.push(MASK_ID as usize);
        ids.extend_from_slice(right);
        let slot = left.len();
        let offset = self.model.placement.offset(ids.len(), rng);
        let probs = self.model.forward_probs(&ids, &[slot], offset)?;
        Ok(probs.row(0).to_vec())
    }

    fn text_ids(&self, texts: &[String]) -> Vec<usize> {
        texts
            .iter()
            .map(|t| self.vocab.id_or_unk(t) as usize)
            .collect()
    }
}

impl Scorer for MlmScorer {
    fn name(&self) -> &'static str {
        "mlm"
    }

    fn can_score(&self) -> bool {
        true
    }

    fn can_fill(&self) -> bool {
        true
    }

    fn score_stream(&self, stream: &TokenStream) -> Result<Vec<f64>> {
        let budget = self.window_budget()?;
        let mut rng = ChaCha8Rng::seed_from_u64(SCORING_SEED);
        let mut out = Vec::with_capacity(stream.len());
        for i in 0..stream.len() {
            let (left, right, _) = context_window(stream, i, budget);
            let probs = self.slot_probs(&self.text_ids(&left), &self.text_ids(&right), &mut rng)?;
            let target = self.vocab.id_or_unk(&stream.token(i).text) as usize;
            out.push(Self::floored_ln(probs[target]));
        }
        Ok(out)
    }

    fn fill(&self, left: &[String], right: &[String], k: usize) -> Result<Vec<FillCandidate>> {
        let cap = self.window_budget()? - 1;
        let left_ids = self.text_ids(left);
        let right_ids = self.text_ids(right);
        // Balanced truncation toward the slot, surplus donated across.
        let left_take = left_ids.len().min(cap / 2);
        let right_take = right_ids.len().min(cap - left_take);
        let left_take = left_ids.len().min(cap - right_take);
        let probs = self.slot_probs(
            &left_ids[left_ids.len() - left_take..],
            &right_ids[..right_take],
            &mut ChaCha8Rng::seed_from_u64(SCORING_SEED),
        )?;

        let mut scored: Vec<(u32, f64)> = self
            .vocab
            .emittable_ids()
            .map(|id| (id, Self::floored_ln(probs[id as usize])))
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(scored
            .into_iter()
            .take(k)
            .map(|(id, score)| FillCandidate {
                text: self.vocab.text(id).to_string(),
                score,
            })
            .collect())
    }
}
