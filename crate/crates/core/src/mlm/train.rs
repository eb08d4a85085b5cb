//! Training loop, masking policy, and ablation sweeps for the micro MLM.
//!
//! Two regimes share one loop: full fine-tuning updates every tensor, while
//! prompt tuning freezes the embeddings and backbone and moves only the soft
//! prompt (plus, optionally, the output head). The optimizer is Adam with
//! decoupled weight decay and a learning rate that decays linearly to zero.
//!
//! Each step re-draws which tokens are masked, so a model can only drive the
//! loss down by actually memorizing the training sequences rather than one
//! fixed mask pattern.

use std::collections::BTreeMap;

use ndarray::Array2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::vocab::MASK_ID;

use super::{Grads, MicroMlm, MlmDims, Placement, PromptInit, TENSOR_NAMES};

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Which parameter surface the optimizer may touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Fine-tune every parameter group.
    Ft,
    /// Prompt tuning: only the soft prompt (and the head unless
    /// `freeze_head`) is trainable.
    Pt,
}

/// Knobs for one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub mode: Mode,
    /// Number of soft prompt rows when the model is built from this config.
    pub prompt_length: usize,
    pub prompt_init: PromptInit,
    pub placement: Placement,
    /// Fraction of each sequence masked per step, strictly inside (0, 1).
    pub mask_percentage: f64,
    pub steps: usize,
    pub batch_size: usize,
    /// Peak learning rate; decays linearly to zero over `steps`.
    pub learning_rate: f64,
    /// Decoupled weight decay applied to trainable tensors.
    pub weight_decay: f64,
    /// In prompt tuning, also freeze the output head so the prompt is the
    /// only trainable surface.
    pub freeze_head: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            mode: Mode::Pt,
            prompt_length: 40,
            prompt_init: PromptInit::BackboneCopy,
            placement: Placement::Front,
            mask_percentage: 0.55,
            steps: 100,
            batch_size: 8,
            learning_rate: 5e-5,
            weight_decay: 0.01,
            freeze_head: false,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mask_percentage > 0.0 && self.mask_percentage < 1.0) {
            return Err(CoreError::config(
                "mask_percentage",
                "must lie strictly between 0 and 1",
            ));
        }
        if self.steps == 0 {
            return Err(CoreError::config("steps", "must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(CoreError::config("batch_size", "must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(CoreError::config("learning_rate", "must be positive and finite"));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(CoreError::config("weight_decay", "must be non-negative"));
        }
        Ok(())
    }

    /// Freeze mask implied by the mode.
    pub fn frozen_flags(&self) -> super::FrozenFlags {
        match self.mode {
            Mode::Ft => super::FrozenFlags::default(),
            Mode::Pt => super::FrozenFlags {
                embeddings: true,
                backbone: true,
                prompt: false,
                head: self.freeze_head,
            },
        }
    }
}

/// Loss history and periodic held-out accuracy from one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean masked negative log-likelihood per step.
    pub loss_curve: Vec<f64>,
    /// `(step, top-1 masked accuracy)` measured on the held-out split at a
    /// fixed cadence and after the final step.
    pub accuracy_curve: Vec<(usize, f64)>,
    /// Accuracy at the end of training (last entry of `accuracy_curve`).
    pub final_accuracy: f64,
}

/// Replace a random subset of `ids` with the mask id.
///
/// The subset size is `round(n * pct)` clamped to `1..=n`; positions are
/// sampled without replacement and reported sorted, paired with the original
/// ids as prediction targets.
pub fn mask_sequence<R: Rng + ?Sized>(
    ids: &[usize],
    pct: f64,
    rng: &mut R,
) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let n = ids.len();
    let want = ((n as f64 * pct).round() as usize).clamp(1, n);
    let mut positions = rand::seq::index::sample(rng, n, want).into_vec();
    positions.sort_unstable();
    let targets: Vec<usize> = positions.iter().map(|&p| ids[p]).collect();
    let mut masked = ids.to_vec();
    for &p in &positions {
        masked[p] = MASK_ID as usize;
    }
    (masked, positions, targets)
}

/// Top-1 masked-prediction accuracy over a set of sequences.
///
/// Masking and placement offsets are drawn from a rng seeded with `seed`, so
/// repeated calls score the exact same prediction problems.
pub fn masked_accuracy(
    model: &MicroMlm,
    sequences: &[Vec<usize>],
    pct: f64,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut correct = 0usize;
    let mut total = 0usize;
    for ids in sequences {
        let (masked, positions, targets) = mask_sequence(ids, pct, &mut rng);
        let offset = model.placement.offset(ids.len(), &mut rng);
        let probs = model.forward_probs(&masked, &positions, offset)?;
        for (r, &t) in targets.iter().enumerate() {
            let row = probs.row(r);
            let argmax = row
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap();
            if argmax == t {
                correct += 1;
            }
            total += 1;
        }
    }
    if total == 0 {
        return Err(CoreError::Precondition("accuracy needs at least one sequence".into()));
    }
    Ok(correct as f64 / total as f64)
}

/// Adam moment buffers for the trainable tensors.
struct Optimizer {
    moments: BTreeMap<&'static str, (Array2<f64>, Array2<f64>)>,
    step: usize,
}

impl Optimizer {
    fn new(model: &MicroMlm) -> Self {
        let moments = TENSOR_NAMES
            .iter()
            .filter(|name| model.is_trainable(name))
            .map(|&name| {
                let dim = model.tensor(name).raw_dim();
                (name, (Array2::zeros(dim.clone()), Array2::zeros(dim)))
            })
            .collect();
        Optimizer { moments, step: 0 }
    }

    /// One Adam step with decoupled weight decay; frozen tensors are never
    /// touched because they have no moment buffers.
    fn apply(&mut self, model: &mut MicroMlm, grads: &Grads, lr: f64, weight_decay: f64) {
        self.step += 1;
        let t = self.step as f64;
        let bias1 = 1.0 - ADAM_BETA1.powf(t);
        let bias2 = 1.0 - ADAM_BETA2.powf(t);
        for (name, (m, v)) in self.moments.iter_mut() {
            let g = &grads[name];
            m.zip_mut_with(g, |m, &g| *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g);
            v.zip_mut_with(g, |v, &g| *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g);
            let tensor = model.tensor_mut(name);
            let theta = tensor.as_slice_mut().unwrap();
            let ms = m.as_slice().unwrap();
            let vs = v.as_slice().unwrap();
            for i in 0..theta.len() {
                let m_hat = ms[i] / bias1;
                let v_hat = vs[i] / bias2;
                theta[i] -= lr * (m_hat / (v_hat.sqrt() + ADAM_EPS) + weight_decay * theta[i]);
            }
        }
    }
}

/// Truncate sequences to fit beside the prompt and drop the unusable ones.
fn prepare_sequences(sequences: &[Vec<usize>], dims: &MlmDims) -> Result<Vec<Vec<usize>>> {
    let budget = dims.max_len.saturating_sub(dims.prompt_len);
    if budget < 2 {
        return Err(CoreError::config(
            "prompt_length",
            "prompt leaves no room for text under max_len",
        ));
    }
    let kept: Vec<Vec<usize>> = sequences
        .iter()
        .filter(|ids| ids.len() >= 2)
        .map(|ids| ids[..ids.len().min(budget)].to_vec())
        .collect();
    if kept.is_empty() {
        return Err(CoreError::Precondition(
            "training needs at least one sequence of two or more tokens".into(),
        ));
    }
    Ok(kept)
}

/// Deterministic train/held-out split: every fifth sequence is held out when
/// there are enough to spare, otherwise evaluation reuses the training set.
fn split_eval(sequences: &[Vec<usize>]) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    if sequences.len() < 5 {
        return (sequences.to_vec(), sequences.to_vec());
    }
    let mut train = Vec::new();
    let mut eval = Vec::new();
    for (i, s) in sequences.iter().enumerate() {
        if i % 5 == 4 {
            eval.push(s.clone());
        } else {
            train.push(s.clone());
        }
    }
    (train, eval)
}

/// Run the training loop on an already-constructed model.
///
/// The model's own placement and freeze mask are authoritative; the config
/// supplies masking, optimization, and seeding. Training is fully
/// deterministic for a given seed, and a non-finite loss aborts with a
/// training error naming the step.
pub fn train(
    model: &mut MicroMlm,
    sequences: &[Vec<usize>],
    config: &TrainConfig,
) -> Result<TrainReport> {
    config.validate()?;
    let prepared = prepare_sequences(sequences, &model.dims)?;
    let (train_set, eval_set) = split_eval(&prepared);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    // Distinct stream for evaluation so scoring never perturbs the training
    // draws and every eval sees the same masked problems.
    let eval_seed = config.seed ^ 0x9e37_79b9_7f4a_7c15;

    let mut optimizer = Optimizer::new(model);
    let mut loss_curve = Vec::with_capacity(config.steps);
    let mut accuracy_curve = Vec::new();
    let eval_every = (config.steps / 10).max(1);

    for step in 0..config.steps {
        let lr = config.learning_rate * (1.0 - step as f64 / config.steps as f64);

        let mut batch_grads: Option<Grads> = None;
        let mut batch_loss = 0.0;
        for _ in 0..config.batch_size {
            let ids = &train_set[rng.random_range(0..train_set.len())];
            let (masked, positions, targets) = mask_sequence(ids, config.mask_percentage, &mut rng);
            let offset = model.placement.offset(ids.len(), &mut rng);
            let (loss, grads) = model.grads(&masked, &positions, &targets, offset)?;
            batch_loss += loss;
            match &mut batch_grads {
                None => batch_grads = Some(grads),
                Some(acc) => {
                    for (name, g) in grads {
                        *acc.get_mut(name).unwrap() += &g;
                    }
                }
            }
        }
        let scale = 1.0 / config.batch_size as f64;
        let mut grads = batch_grads.unwrap();
        for g in grads.values_mut() {
            g.mapv_inplace(|v| v * scale);
        }
        let loss = batch_loss * scale;
        if !loss.is_finite() {
            return Err(CoreError::Training {
                step,
                message: format!("loss became {loss}"),
            });
        }
        loss_curve.push(loss);

        optimizer.apply(model, &grads, lr, config.weight_decay);

        if (step + 1) % eval_every == 0 || step + 1 == config.steps {
            let acc = masked_accuracy(model, &eval_set, config.mask_percentage, eval_seed)?;
            accuracy_curve.push((step + 1, acc));
        }
    }

    let final_accuracy = accuracy_curve.last().map(|&(_, a)| a).unwrap_or(0.0);
    Ok(TrainReport {
        loss_curve,
        accuracy_curve,
        final_accuracy,
    })
}

/// Build a model from the config and train it in one call.
///
/// The prompt length, init strategy, placement, and freeze mask all come
/// from the config; `vocab`, `d`, and `max_len` fix the architecture.
pub fn build_and_train(
    sequences: &[Vec<usize>],
    vocab: usize,
    d: usize,
    max_len: usize,
    config: &TrainConfig,
) -> Result<(MicroMlm, TrainReport)> {
    config.validate()?;
    let dims = MlmDims {
        vocab,
        d,
        max_len,
        prompt_len: config.prompt_length,
    };
    let mut model = MicroMlm::new(dims, config.placement, config.seed);
    model.frozen = config.frozen_flags();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    model.init_prompt(config.prompt_init, &mut rng);
    let report = train(&mut model, sequences, config)?;
    Ok((model, report))
}

/// One measured cell of an ablation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub label: String,
    pub accuracy: f64,
}

/// Accuracy tables for the four prompt-tuning ablations. Values are
/// recorded, not judged; the shapes are the contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    /// One row per prompt initialization strategy (4 rows).
    pub init_rows: Vec<AblationRow>,
    /// One row per placement policy (4 rows).
    pub placement_rows: Vec<AblationRow>,
    /// Prompt length swept 0..=100 in steps of 10 (11 rows).
    pub length_rows: Vec<AblationRow>,
    /// Mask percentage swept 5%..=95% in steps of 10 (10 rows).
    pub mask_rows: Vec<AblationRow>,
}

/// Architecture and budget shared by every ablation cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblateConfig {
    pub vocab: usize,
    pub d: usize,
    pub max_len: usize,
    pub steps: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for AblateConfig {
    fn default() -> Self {
        AblateConfig {
            vocab: 64,
            d: 16,
            max_len: 128,
            steps: 30,
            batch_size: 4,
            learning_rate: 5e-3,
            seed: 0,
        }
    }
}

/// Sweep prompt init, placement, prompt length, and mask percentage, one
/// knob at a time around a shared prompt-tuning baseline.
pub fn ablate(sequences: &[Vec<usize>], cfg: &AblateConfig) -> Result<AblationReport> {
    let base = TrainConfig {
        mode: Mode::Pt,
        prompt_length: 20,
        prompt_init: PromptInit::BackboneCopy,
        placement: Placement::Front,
        mask_percentage: 0.55,
        steps: cfg.steps,
        batch_size: cfg.batch_size,
        learning_rate: cfg.learning_rate,
        weight_decay: 0.0,
        freeze_head: false,
        seed: cfg.seed,
    };
    let run = |config: &TrainConfig| -> Result<f64> {
        let (_, report) = build_and_train(sequences, cfg.vocab, cfg.d, cfg.max_len, config)?;
        Ok(report.final_accuracy)
    };

    let mut init_rows = Vec::new();
    for (label, strategy) in [
        ("backbone-copy", PromptInit::BackboneCopy),
        ("random", PromptInit::Random),
        ("const-one", PromptInit::ConstOne),
        ("same-token", PromptInit::SameToken),
    ] {
        let config = TrainConfig {
            prompt_init: strategy,
            ..base.clone()
        };
        init_rows.push(AblationRow {
            label: label.to_string(),
            accuracy: run(&config)?,
        });
    }

    let mut placement_rows = Vec::new();
    for (label, placement) in [
        ("front", Placement::Front),
        ("back", Placement::Back),
        ("mid", Placement::Mid),
        ("random", Placement::Random),
    ] {
        let config = TrainConfig {
            placement,
            ..base.clone()
        };
        placement_rows.push(AblationRow {
            label: label.to_string(),
            accuracy: run(&config)?,
        });
    }

    let mut length_rows = Vec::new();
    for length in (0..=100).step_by(10) {
        let config = TrainConfig {
            prompt_length: length,
            ..base.clone()
        };
        length_rows.push(AblationRow {
            label: length.to_string(),
            accuracy: run(&config)?,
        });
    }

    let mut mask_rows = Vec::new();
    for tenths in 0..10 {
        let pct = 0.05 + 0.10 * tenths as f64;
        let config = TrainConfig {
            mask_percentage: pct,
            ..base.clone()
        };
        mask_rows.push(AblationRow {
            label: format!("{}%", (pct * 100.0).round() as u32),
            accuracy: run(&config)?,
        });
    }

    Ok(AblationReport {
        init_rows,
        placement_rows,
        length_rows,
        mask_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlm::FrozenFlags;

    fn toy_sequences(count: usize, len: usize, vocab: usize) -> Vec<Vec<usize>> {
        (0..count)
            .map(|s| (0..len).map(|i| 2 + (s * 13 + i * 7 + 1) % (vocab - 2)).collect())
            .collect()
    }

    #[test]
    fn masking_counts_round_and_clamp() {
        let ids: Vec<usize> = (0..20).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (masked, positions, targets) = mask_sequence(&ids, 0.55, &mut rng);
        assert_eq!(positions.len(), 11); // round(20 * 0.55)
        assert_eq!(targets.len(), 11);
        for (&p, &t) in positions.iter().zip(&targets) {
            assert_eq!(masked[p], MASK_ID as usize);
            assert_eq!(t, ids[p]);
        }
        assert!(positions.windows(2).all(|w| w[0] < w[1]));

        // A tiny fraction still masks at least one token.
        let (_, positions, _) = mask_sequence(&ids, 0.01, &mut rng);
        assert_eq!(positions.len(), 1);
    }

    #[test]
    fn config_validation_rejects_bad_fields() {
        let mut config = TrainConfig::default();
        config.mask_percentage = 1.0;
        assert!(config.validate().is_err());
        config.mask_percentage = 0.0;
        assert!(config.validate().is_err());
        config = TrainConfig::default();
        config.steps = 0;
        assert!(config.validate().is_err());
        config = TrainConfig::default();
        config.learning_rate = -1.0;
        assert!(config.validate().is_err());
    }

    #[test]
    fn same_seed_gives_identical_loss_curves() {
        let sequences = toy_sequences(6, 16, 12);
        let config = TrainConfig {
            mode: Mode::Ft,
            prompt_length: 4,
            steps: 12,
            batch_size: 2,
            learning_rate: 1e-3,
            seed: 42,
            ..TrainConfig::default()
        };
        let (_, a) = build_and_train(&sequences, 12, 8, 64, &config).unwrap();
        let (_, b) = build_and_train(&sequences, 12, 8, 64, &config).unwrap();
        assert_eq!(a.loss_curve, b.loss_curve);
        assert_eq!(a.accuracy_curve, b.accuracy_curve);
    }

    #[test]
    fn overfits_a_single_short_batch() {
        // One 20-token sequence, fine-tuned hard: the model must memorize it
        // well enough to push the masked loss under 0.1.
        let sequences = vec![(0..20).map(|i| 2 + (i * 3 + 1) % 14).collect::<Vec<_>>()];
        let config = TrainConfig {
            mode: Mode::Ft,
            prompt_length: 0,
            mask_percentage: 0.55,
            steps: 500,
            batch_size: 1,
            learning_rate: 0.02,
            weight_decay: 0.0,
            seed: 3,
            ..TrainConfig::default()
        };
        let (_, report) = build_and_train(&sequences, 16, 32, 128, &config).unwrap();
        let best = report.loss_curve.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(best < 0.1, "best loss {best}");
    }

    #[test]
    fn prompt_tuning_leaves_frozen_tensors_bit_identical() {
        let sequences = toy_sequences(5, 14, 10);
        let config = TrainConfig {
            mode: Mode::Pt,
            prompt_length: 6,
            freeze_head: false,
            steps: 60,
            batch_size: 2,
            learning_rate: 1e-2,
            seed: 9,
            ..TrainConfig::default()
        };
        let dims = MlmDims {
            vocab: 10,
            d: 8,
            max_len: 64,
            prompt_len: 6,
        };
        let mut model = MicroMlm::new(dims, config.placement, config.seed);
        model.frozen = config.frozen_flags();
        let before = model.clone();
        train(&mut model, &sequences, &config).unwrap();

        for name in TENSOR_NAMES {
            let unchanged = model.tensor(name) == before.tensor(name);
            if model.is_trainable(name) {
                assert!(!unchanged, "trainable tensor {name} never moved");
            } else {
                assert!(unchanged, "frozen tensor {name} changed");
            }
        }
    }

    #[test]
    fn freeze_head_narrows_training_to_the_prompt() {
        let config = TrainConfig {
            mode: Mode::Pt,
            prompt_length: 6,
            freeze_head: true,
            ..TrainConfig::default()
        };
        let mut model = MicroMlm::new(
            MlmDims {
                vocab: 10,
                d: 8,
                max_len: 64,
                prompt_len: 6,
            },
            Placement::Front,
            0,
        );
        model.frozen = config.frozen_flags();
        assert_eq!(model.trainable_param_count(), 6 * 8);
        assert_eq!(
            model.frozen,
            FrozenFlags {
                embeddings: true,
                backbone: true,
                prompt: false,
                head: true,
            }
        );
    }

    #[test]
    fn non_finite_loss_reports_the_step() {
        let sequences = toy_sequences(2, 10, 8);
        let config = TrainConfig {
            mode: Mode::Ft,
            prompt_length: 0,
            steps: 5,
            batch_size: 1,
            seed: 0,
            ..TrainConfig::default()
        };
        let mut model = MicroMlm::new(
            MlmDims {
                vocab: 8,
                d: 4,
                max_len: 32,
                prompt_len: 0,
            },
            Placement::Front,
            0,
        );
        model.wq[[0, 0]] = f64::NAN;
        let err = train(&mut model, &sequences, &config).unwrap_err();
        match err {
            CoreError::Training { step, .. } => assert_eq!(step, 0),
            other => panic!("expected a training error, got {other:?}"),
        }
    }

    #[test]
    fn accuracy_is_a_rate_and_deterministic() {
        let sequences = toy_sequences(4, 12, 10);
        let model = MicroMlm::new(
            MlmDims {
                vocab: 10,
                d: 8,
                max_len: 64,
                prompt_len: 2,
            },
            Placement::Mid,
            5,
        );
        let a = masked_accuracy(&model, &sequences, 0.4, 77).unwrap();
        let b = masked_accuracy(&model, &sequences, 0.4, 77).unwrap();
        assert_eq!(a, b);
        assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn random_placement_trains_without_drift() {
        let sequences = toy_sequences(4, 12, 10);
        let config = TrainConfig {
            mode: Mode::Pt,
            prompt_length: 4,
            placement: Placement::Random,
            steps: 8,
            batch_size: 2,
            learning_rate: 1e-3,
            seed: 21,
            ..TrainConfig::default()
        };
        let (model, report) = build_and_train(&sequences, 10, 8, 64, &config).unwrap();
        assert!(model.all_finite());
        assert_eq!(report.loss_curve.len(), 8);
    }

    #[test]
    fn sequences_are_truncated_to_fit_the_prompt() {
        // max_len 32 with a 20-row prompt leaves room for 12 text tokens;
        // a 30-token sequence must be silently truncated, not rejected.
        let sequences = vec![(0..30).map(|i| 2 + i % 6).collect::<Vec<_>>()];
        let config = TrainConfig {
            mode: Mode::Pt,
            prompt_length: 20,
            steps: 3,
            batch_size: 1,
            learning_rate: 1e-3,
            seed: 1,
            ..TrainConfig::default()
        };
        let (_, report) = build_and_train(&sequences, 10, 4, 32, &config).unwrap();
        assert_eq!(report.loss_curve.len(), 3);
    }

    #[test]
    fn ablation_tables_have_the_contracted_shapes() {
        let sequences = toy_sequences(6, 20, 16);
        let cfg = AblateConfig {
            vocab: 16,
            d: 8,
            max_len: 128,
            steps: 3,
            batch_size: 2,
            learning_rate: 1e-3,
            seed: 0,
        };
        let report = ablate(&sequences, &cfg).unwrap();
        assert_eq!(report.init_rows.len(), 4);
        assert_eq!(report.placement_rows.len(), 4);
        assert_eq!(report.length_rows.len(), 11);
        assert_eq!(report.mask_rows.len(), 10);
        assert_eq!(report.length_rows[0].label, "0");
        assert_eq!(report.length_rows[10].label, "100");
        assert_eq!(report.mask_rows[0].label, "5%");
        assert_eq!(report.mask_rows[9].label, "95%");
        for row in report
            .init_rows
            .iter()
            .chain(&report.placement_rows)
            .chain(&report.length_rows)
            .chain(&report.mask_rows)
        {
            assert!((0.0..=1.0).contains(&row.accuracy));
        }
    }
}
