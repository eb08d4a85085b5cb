//! A miniature masked language model with a trainable soft prompt.
//!
//! The model is a single bidirectional self-attention block plus a ReLU
//! feed-forward layer, both with residual connections and no normalization,
//! operating on learned token + absolute position embeddings. A soft prompt
//! is a small matrix of free embedding rows spliced into the input sequence;
//! in prompt-tuning mode everything except the prompt (and optionally the
//! output head) stays frozen, so the trainable surface is tiny.
//!
//! Everything is `f64` on `ndarray` so analytic gradients can be checked
//! against central finite differences tightly. The backward pass is written
//! by hand; `grad_check` is the contract that keeps it honest.
//!
//! Layout convention: a sequence of `n` token ids plus an `m`-row prompt
//! yields a combined length `L = n + m`. The prompt block is inserted at an
//! offset chosen by [`Placement`]; text rows keep their *pre-insertion*
//! position indices for the positional embedding, and prompt rows get no
//! positional embedding at all. That way the prompt is a pure bias on
//! attention, not a shift of the text's coordinate system.

pub mod checkpoint;
pub mod scorer;
pub mod train;

use std::collections::BTreeMap;

use ndarray::{Array2, Axis};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::vocab::MASK_ID;

/// Standard deviation used for random tensor initialization.
pub const INIT_SCALE: f64 = 0.02;

/// Probabilities below this are clamped before taking logs in the loss.
pub const PROB_FLOOR: f64 = 1e-12;

/// Where the soft prompt block is spliced into the token sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    /// Prompt rows before all text rows.
    Front,
    /// Prompt rows after all text rows.
    Back,
    /// Prompt block inserted at `floor(n / 2)`.
    Mid,
    /// Offset drawn uniformly from `0..=n`, re-drawn for every batch element.
    Random,
}

impl Placement {
    /// Resolve the insertion offset for a sequence of `n` text tokens.
    /// `Random` consumes one draw from `rng`; the other variants ignore it.
    pub fn offset<R: Rng + ?Sized>(self, n: usize, rng: &mut R) -> usize {
        match self {
            Placement::Front => 0,
            Placement::Back => n,
            Placement::Mid => n / 2,
            Placement::Random => rng.random_range(0..=n),
        }
    }
}

/// How the soft prompt matrix is filled before training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromptInit {
    /// Each prompt row copies a uniformly sampled row of the token embedding.
    BackboneCopy,
    /// Gaussian noise scaled by [`INIT_SCALE`].
    Random,
    /// Every entry set to exactly 1.0.
    ConstOne,
    /// Every row is a copy of one designated token's embedding (the mask
    /// token by default), so all rows start identical.
    SameToken,
}

/// Which parameter groups are held fixed during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FrozenFlags {
    pub embeddings: bool,
    pub backbone: bool,
    pub prompt: bool,
    pub head: bool,
}

/// Coarse parameter grouping used for freezing and reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    /// Token and position embeddings.
    Embeddings,
    /// Attention projections and the feed-forward layer.
    Backbone,
    /// The soft prompt matrix.
    Prompt,
    /// The output projection onto the vocabulary.
    Head,
}

/// Fixed enumeration of every tensor in the model. Biases are stored as
/// `1 x k` matrices so a single `Array2` type covers everything.
pub const TENSOR_NAMES: [&str; 17] = [
    "e_text", "e_pos", "wq", "bq", "wk", "bk", "wv", "bv", "wo", "bo", "w1", "b1", "w2", "b2",
    "prompt", "wh", "bh",
];

/// Group membership for a tensor name from [`TENSOR_NAMES`].
pub fn group_of(name: &str) -> Group {
    match name {
        "e_text" | "e_pos" => Group::Embeddings,
        "prompt" => Group::Prompt,
        "wh" | "bh" => Group::Head,
        _ => Group::Backbone,
    }
}

/// Gradients keyed by tensor name, same shapes as the parameters.
pub type Grads = BTreeMap<&'static str, Array2<f64>>;

/// Static shape information for a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlmDims {
    /// Vocabulary size (rows of the token embedding).
    pub vocab: usize,
    /// Embedding width.
    pub d: usize,
    /// Longest combined (prompt + text) sequence supported.
    pub max_len: usize,
    /// Number of soft prompt rows; zero disables the prompt entirely.
    pub prompt_len: usize,
}

/// The full parameter set plus its placement policy and freeze mask.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroMlm {
    pub dims: MlmDims,
    pub placement: Placement,
    pub frozen: FrozenFlags,
    pub e_text: Array2<f64>,
    pub e_pos: Array2<f64>,
    pub wq: Array2<f64>,
    pub bq: Array2<f64>,
    pub wk: Array2<f64>,
    pub bk: Array2<f64>,
    pub wv: Array2<f64>,
    pub bv: Array2<f64>,
    pub wo: Array2<f64>,
    pub bo: Array2<f64>,
    pub w1: Array2<f64>,
    pub b1: Array2<f64>,
    pub w2: Array2<f64>,
    pub b2: Array2<f64>,
    pub prompt: Array2<f64>,
    pub wh: Array2<f64>,
    pub bh: Array2<f64>,
}

/// One standard normal draw via Box-Muller, deterministic under the rng seed.
fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn randn<R: Rng + ?Sized>(rows: usize, cols: usize, scale: f64, rng: &mut R) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| scale * normal(rng))
}

/// Row-wise softmax with max subtraction; each output row sums to one up to
/// floating-point rounding (far inside 1e-9).
fn softmax_rows(x: &Array2<f64>) -> Array2<f64> {
    let mut out = x.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum: f64 = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    out
}

/// Everything the backward pass needs from a forward evaluation.
struct Cache {
    offset: usize,
    x: Array2<f64>,
    q: Array2<f64>,
    k: Array2<f64>,
    v: Array2<f64>,
    attn: Array2<f64>,
    ctx: Array2<f64>,
    h1: Array2<f64>,
    z1: Array2<f64>,
    relu: Array2<f64>,
    h2: Array2<f64>,
}

impl MicroMlm {
    /// Fresh model with Gaussian-initialized weights and zero biases.
    pub fn new(dims: MlmDims, placement: Placement, seed: u64) -> Self {
        let MlmDims {
            vocab,
            d,
            max_len,
            prompt_len,
        } = dims;
        let hidden = 4 * d;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        MicroMlm {
            dims,
            placement,
            frozen: FrozenFlags::default(),
            e_text: randn(vocab, d, INIT_SCALE, &mut rng),
            e_pos: randn(max_len, d, INIT_SCALE, &mut rng),
            wq: randn(d, d, INIT_SCALE, &mut rng),
            bq: Array2::zeros((1, d)),
            wk: randn(d, d, INIT_SCALE, &mut rng),
            bk: Array2::zeros((1, d)),
            wv: randn(d, d, INIT_SCALE, &mut rng),
            bv: Array2::zeros((1, d)),
            wo: randn(d, d, INIT_SCALE, &mut rng),
            bo: Array2::zeros((1, d)),
            w1: randn(d, hidden, INIT_SCALE, &mut rng),
            b1: Array2::zeros((1, hidden)),
            w2: randn(hidden, d, INIT_SCALE, &mut rng),
            b2: Array2::zeros((1, d)),
            prompt: randn(prompt_len, d, INIT_SCALE, &mut rng),
            wh: randn(d, vocab, INIT_SCALE, &mut rng),
            bh: Array2::zeros((1, vocab)),
        }
    }

    pub fn tensor(&self, name: &str) -> &Array2<f64> {
        match name {
            "e_text" => &self.e_text,
            "e_pos" => &self.e_pos,
            "wq" => &self.wq,
            "bq" => &self.bq,
            "wk" => &self.wk,
            "bk" => &self.bk,
            "wv" => &self.wv,
            "bv" => &self.bv,
            "wo" => &self.wo,
            "bo" => &self.bo,
            "w1" => &self.w1,
            "b1" => &self.b1,
            "w2" => &self.w2,
            "b2" => &self.b2,
            "prompt" => &self.prompt,
            "wh" => &self.wh,
            "bh" => &self.bh,
            other => panic!("unknown tensor name {other:?}"),
        }
    }

    pub fn tensor_mut(&mut self, name: &str) -> &mut Array2<f64> {
        match name {
            "e_text" => &mut self.e_text,
            "e_pos" => &mut self.e_pos,
            "wq" => &mut self.wq,
            "bq" => &mut self.bq,
            "wk" => &mut self.wk,
            "bk" => &mut self.bk,
            "wv" => &mut self.wv,
            "bv" => &mut self.bv,
            "wo" => &mut self.wo,
            "bo" => &mut self.bo,
            "w1" => &mut self.w1,
            "b1" => &mut self.b1,
            "w2" => &mut self.w2,
            "b2" => &mut self.b2,
            "prompt" => &mut self.prompt,
            "wh" => &mut self.wh,
            "bh" => &mut self.bh,
            other => panic!("unknown tensor name {other:?}"),
        }
    }

    /// True when the group owning `name` is trainable under the current
    /// freeze mask.
    pub fn is_trainable(&self, name: &str) -> bool {
        match group_of(name) {
            Group::Embeddings => !self.frozen.embeddings,
            Group::Backbone => !self.frozen.backbone,
            Group::Prompt => !self.frozen.prompt,
            Group::Head => !self.frozen.head,
        }
    }

    /// Total number of scalar parameters the current freeze mask leaves
    /// trainable. In prompt-tuning with a frozen head this is exactly
    /// `prompt_len * d`.
    pub fn trainable_param_count(&self) -> usize {
        TENSOR_NAMES
            .iter()
            .filter(|name| self.is_trainable(name))
            .map(|name| self.tensor(name).len())
            .sum()
    }

    /// True when every parameter entry is finite.
    pub fn all_finite(&self) -> bool {
        TENSOR_NAMES
            .iter()
            .all(|name| self.tensor(name).iter().all(|v| v.is_finite()))
    }

    /// Replace the prompt rows according to an initialization strategy.
    /// `BackboneCopy` samples token-embedding rows with replacement;
    /// `SameToken` repeats the mask token's embedding row.
    pub fn init_prompt<R: Rng + ?Sized>(&mut self, strategy: PromptInit, rng: &mut R) {
        let (m, d) = (self.dims.prompt_len, self.dims.d);
        self.prompt = match strategy {
            PromptInit::BackboneCopy => Array2::from_shape_fn((m, d), {
                let mut rows: Vec<usize> = Vec::with_capacity(m);
                for _ in 0..m {
                    rows.push(rng.random_range(0..self.dims.vocab));
                }
                let e_text = &self.e_text;
                move |(i, j)| e_text[[rows[i], j]]
            }),
            PromptInit::Random => randn(m, d, INIT_SCALE, rng),
            PromptInit::ConstOne => Array2::ones((m, d)),
            PromptInit::SameToken => {
                let row = self.e_text.row(MASK_ID as usize).to_owned();
                Array2::from_shape_fn((m, d), |(_, j)| row[j])
            }
        };
    }

    /// Combined-sequence index of text position `i` once an `m`-row prompt
    /// block sits at `offset`.
    fn combined_index(&self, i: usize, offset: usize) -> usize {
        if i < offset {
            i
        } else {
            i + self.dims.prompt_len
        }
    }

    fn check_inputs(&self, ids: &[usize], mask_positions: &[usize], offset: usize) -> Result<()> {
        let n = ids.len();
        let m = self.dims.prompt_len;
        if n == 0 {
            return Err(CoreError::Precondition("forward needs a non-empty sequence".into()));
        }
        if n + m > self.dims.max_len {
            return Err(CoreError::Precondition(format!(
                "sequence of {n} tokens plus {m} prompt rows exceeds max_len {}",
                self.dims.max_len
            )));
        }
        if let Some(&bad) = ids.iter().find(|&&id| id >= self.dims.vocab) {
            return Err(CoreError::Precondition(format!(
                "token id {bad} out of range for vocabulary of {}",
                self.dims.vocab
            )));
        }
        if let Some(&bad) = mask_positions.iter().find(|&&p| p >= n) {
            return Err(CoreError::Precondition(format!(
                "mask position {bad} out of range for sequence of {n}"
            )));
        }
        if offset > n {
            return Err(CoreError::Precondition(format!(
                "prompt offset {offset} out of range for sequence of {n}"
            )));
        }
        Ok(())
    }

    /// Run the backbone and keep every intermediate needed by backward.
    fn forward_cache(&self, ids: &[usize], offset: usize) -> Cache {
        let n = ids.len();
        let m = self.dims.prompt_len;
        let d = self.dims.d;
        let len = n + m;
        let scale = 1.0 / (d as f64).sqrt();

        // Assemble the combined input: text rows are token + position
        // embeddings (positions indexed before insertion), prompt rows are
        // the raw prompt matrix.
        let mut x = Array2::<f64>::zeros((len, d));
        for (i, &id) in ids.iter().enumerate() {
            let at = self.combined_index(i, offset);
            let row = &self.e_text.row(id) + &self.e_pos.row(i);
            x.row_mut(at).assign(&row);
        }
        for j in 0..m {
            x.row_mut(offset + j).assign(&self.prompt.row(j));
        }

        let q = x.dot(&self.wq) + &self.bq;
        let k = x.dot(&self.wk) + &self.bk;
        let v = x.dot(&self.wv) + &self.bv;
        let scores = q.dot(&k.t()) * scale;
        let attn = softmax_rows(&scores);
        let ctx = attn.dot(&v);
        let h1 = &x + &(ctx.dot(&self.wo) + &self.bo);
        let z1 = h1.dot(&self.w1) + &self.b1;
        let relu = z1.mapv(|v| v.max(0.0));
        let h2 = &h1 + &(relu.dot(&self.w2) + &self.b2);

        Cache {
            offset,
            x,
            q,
            k,
            v,
            attn,
            ctx,
            h1,
            z1,
            relu,
            h2,
        }
    }

    /// Vocabulary distributions at the requested text positions. Row `r`
    /// corresponds to `mask_positions[r]`; each row sums to one.
    pub fn forward_probs(
        &self,
        ids: &[usize],
        mask_positions: &[usize],
        offset: usize,
    ) -> Result<Array2<f64>> {
        self.check_inputs(ids, mask_positions, offset)?;
        let cache = self.forward_cache(ids, offset);
        let mut logits = Array2::<f64>::zeros((mask_positions.len(), self.dims.vocab));
        for (r, &p) in mask_positions.iter().enumerate() {
            let h = cache.h2.row(self.combined_index(p, offset));
            let row = h.dot(&self.wh) + &self.bh.row(0);
            logits.row_mut(r).assign(&row);
        }
        Ok(softmax_rows(&logits))
    }

    /// Mean negative log-likelihood of `targets` at `mask_positions`.
    pub fn loss(
        &self,
        ids: &[usize],
        mask_positions: &[usize],
        targets: &[usize],
        offset: usize,
    ) -> Result<f64> {
        let probs = self.forward_with_targets(ids, mask_positions, targets, offset)?;
        Ok(nll(&probs, targets))
    }

    fn forward_with_targets(
        &self,
        ids: &[usize],
        mask_positions: &[usize],
        targets: &[usize],
        offset: usize,
    ) -> Result<Array2<f64>> {
        if targets.len() != mask_positions.len() {
            return Err(CoreError::Precondition(format!(
                "{} targets for {} mask positions",
                targets.len(),
                mask_positions.len()
            )));
        }
        if mask_positions.is_empty() {
            return Err(CoreError::Precondition("loss needs at least one mask position".into()));
        }
        if let Some(&bad) = targets.iter().find(|&&t| t >= self.dims.vocab) {
            return Err(CoreError::Precondition(format!(
                "target id {bad} out of range for vocabulary of {}",
                self.dims.vocab
            )));
        }
        self.forward_probs(ids, mask_positions, offset)
    }

    /// Loss and analytic gradients for every tensor (freezing is applied by
    /// the optimizer, not here, so finite-difference checks can exercise all
    /// groups).
    pub fn grads(
        &self,
        ids: &[usize],
        mask_positions: &[usize],
        targets: &[usize],
        offset: usize,
    ) -> Result<(f64, Grads)> {
        let _ = self.forward_with_targets(ids, mask_positions, targets, offset)?;
        let cache = self.forward_cache(ids, offset);
        let n = ids.len();
        let m = self.dims.prompt_len;
        let d = self.dims.d;
        let len = n + m;
        let scale = 1.0 / (d as f64).sqrt();
        let count = mask_positions.len() as f64;

        let mut g: Grads = TENSOR_NAMES
            .iter()
            .map(|&name| (name, Array2::zeros(self.tensor(name).raw_dim())))
            .collect();

        // Head: softmax + cross-entropy collapse to (probs - onehot) / M.
        let mut probs = Array2::<f64>::zeros((mask_positions.len(), self.dims.vocab));
        for (r, &p) in mask_positions.iter().enumerate() {
            let h = cache.h2.row(self.combined_index(p, offset));
            let row = h.dot(&self.wh) + &self.bh.row(0);
            probs.row_mut(r).assign(&row);
        }
        probs = softmax_rows(&probs);
        let loss = nll(&probs, targets);

        let mut d_h2 = Array2::<f64>::zeros((len, d));
        for (r, (&p, &t)) in mask_positions.iter().zip(targets).enumerate() {
            let mut d_logits = probs.row(r).to_owned();
            d_logits[t] -= 1.0;
            d_logits.mapv_inplace(|v| v / count);

            let at = self.combined_index(p, offset);
            let h = cache.h2.row(at).to_owned();
            let h_col = h.insert_axis(Axis(1));
            let d_row = d_logits.clone().insert_axis(Axis(0));
            *g.get_mut("wh").unwrap() += &h_col.dot(&d_row);
            *g.get_mut("bh").unwrap() += &d_row;
            let d_h = self.wh.dot(&d_logits);
            let mut row = d_h2.row_mut(at);
            row += &d_h;
        }

        // Feed-forward with residual: h2 = h1 + relu(h1 w1 + b1) w2 + b2.
        let d_z2 = &d_h2;
        *g.get_mut("w2").unwrap() += &cache.relu.t().dot(d_z2);
        *g.get_mut("b2").unwrap() += &d_z2.sum_axis(Axis(0)).insert_axis(Axis(0));
        let d_relu = d_z2.dot(&self.w2.t());
        let relu_gate = cache.z1.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
        let d_z1 = &d_relu * &relu_gate;
        *g.get_mut("w1").unwrap() += &cache.h1.t().dot(&d_z1);
        *g.get_mut("b1").unwrap() += &d_z1.sum_axis(Axis(0)).insert_axis(Axis(0));
        let d_h1 = &d_h2 + &d_z1.dot(&self.w1.t());

        // Attention with residual: h1 = x + (softmax(q k^T / sqrt(d)) v) wo + bo.
        let d_o = &d_h1;
        *g.get_mut("wo").unwrap() += &cache.ctx.t().dot(d_o);
        *g.get_mut("bo").unwrap() += &d_o.sum_axis(Axis(0)).insert_axis(Axis(0));
        let d_ctx = d_o.dot(&self.wo.t());
        let d_attn = d_ctx.dot(&cache.v.t());
        let d_v = cache.attn.t().dot(&d_ctx);

        // Row-wise softmax Jacobian: dS = A .* (dA - (dA . A)).
        let mut d_scores = Array2::<f64>::zeros((len, len));
        for i in 0..len {
            let a = cache.attn.row(i);
            let da = d_attn.row(i);
            let dot: f64 = da.dot(&a);
            let mut row = d_scores.row_mut(i);
            for j in 0..len {
                row[j] = a[j] * (da[j] - dot);
            }
        }
        let d_q = d_scores.dot(&cache.k) * scale;
        let d_k = d_scores.t().dot(&cache.q) * scale;

        *g.get_mut("wq").unwrap() += &cache.x.t().dot(&d_q);
        *g.get_mut("bq").unwrap() += &d_q.sum_axis(Axis(0)).insert_axis(Axis(0));
        *g.get_mut("wk").unwrap() += &cache.x.t().dot(&d_k);
        *g.get_mut("bk").unwrap() += &d_k.sum_axis(Axis(0)).insert_axis(Axis(0));
        *g.get_mut("wv").unwrap() += &cache.x.t().dot(&d_v);
        *g.get_mut("bv").unwrap() += &d_v.sum_axis(Axis(0)).insert_axis(Axis(0));

        let d_x = &(&d_q.dot(&self.wq.t()) + &d_k.dot(&self.wk.t())) + &(d_v.dot(&self.wv.t()) + d_h1);

        // Route combined-row gradients back to embeddings and prompt.
        for (i, &id) in ids.iter().enumerate() {
            let at = self.combined_index(i, cache.offset);
            let row = d_x.row(at);
            let mut text_row = g.get_mut("e_text").unwrap().row_mut(id);
            text_row += &row;
            drop(text_row);
            let mut pos_row = g.get_mut("e_pos").unwrap().row_mut(i);
            pos_row += &row;
        }
        for j in 0..m {
            let row = d_x.row(cache.offset + j);
            let mut prompt_row = g.get_mut("prompt").unwrap().row_mut(j);
            prompt_row += &row;
        }

        Ok((loss, g))
    }
}

/// Mean negative log-likelihood with the probability floor applied.
fn nll(probs: &Array2<f64>, targets: &[usize]) -> f64 {
    let total: f64 = targets
        .iter()
        .enumerate()
        .map(|(r, &t)| {
            let p = probs[[r, t]];
            // Lift only small valid probabilities; `f64::max` would also
            // swallow NaN, which must propagate so training can abort.
            let p = if p < PROB_FLOOR { PROB_FLOOR } else { p };
            -p.ln()
        })
        .sum();
    total / targets.len() as f64
}

/// Worst relative error between analytic gradients and central finite
/// differences over every entry of every trainable tensor.
///
/// Relative error uses `|a - b| / max(1, |a|, |b|)` so near-zero gradients
/// do not blow the ratio up. Intended for small models (d <= 16, modest
/// vocabularies); it evaluates the loss twice per parameter entry.
pub fn grad_check(
    model: &mut MicroMlm,
    ids: &[usize],
    mask_positions: &[usize],
    targets: &[usize],
    offset: usize,
    epsilon: f64,
) -> Result<f64> {
    let (_, analytic) = model.grads(ids, mask_positions, targets, offset)?;
    let mut worst = 0.0_f64;
    for name in TENSOR_NAMES {
        if !model.is_trainable(name) {
            continue;
        }
        let len = model.tensor(name).len();
        for flat in 0..len {
            let original = {
                let t = model.tensor_mut(name);
                let slice = t.as_slice_mut().expect("tensors are contiguous");
                let original = slice[flat];
                slice[flat] = original + epsilon;
                original
            };
            let up = model.loss(ids, mask_positions, targets, offset)?;
            {
                let t = model.tensor_mut(name);
                t.as_slice_mut().unwrap()[flat] = original - epsilon;
            }
            let down = model.loss(ids, mask_positions, targets, offset)?;
            {
                let t = model.tensor_mut(name);
                t.as_slice_mut().unwrap()[flat] = original;
            }
            let numeric = (up - down) / (2.0 * epsilon);
            let exact = analytic[name].as_slice().unwrap()[flat];
            let rel = (numeric - exact).abs() / 1.0_f64.max(numeric.abs()).max(exact.abs());
            if rel > worst {
                worst = rel;
            }
        }
    }
    Ok(worst)
}
