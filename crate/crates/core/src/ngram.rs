//! Count-based n-gram language model over lexer tokens.
//!
//! Two smoothing regimes:
//!
//! * `witten-bell` — interpolated Witten-Bell. For a context c with total
//!   count N(c) and T(c) distinct continuations,
//!   `P(w|c) = (count(c,w) + T(c) * P(w|c')) / (N(c) + T(c))` where c' drops
//!   the oldest context token; the recursion bottoms out at a unigram
//!   estimate interpolated with the uniform distribution over the whole
//!   vocabulary. This distribution sums to exactly 1 over the vocabulary.
//! * `none` — maximum likelihood for events observed in training, with
//!   recursive stupid backoff (factor 0.4) for everything else. Observed
//!   continuations keep their exact relative frequencies; the backoff mass
//!   keeps unseen events finite but is deliberately not renormalized.
//!
//! Scores are natural logs and the model is fully deterministic: training on
//! the same corpus yields bit-identical tables, and `save`/`load` round-trip
//! every count exactly.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{CoreError, Result};
use crate::scorer::{FillCandidate, Scorer};
use crate::tokenizer::TokenStream;
use crate::vocab::Vocab;

const MAGIC: &[u8; 8] = b"LECNGRAM";
const VERSION: u16 = 1;
const BACKOFF_FACTOR: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothing {
    WittenBell,
    None,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NGramConfig {
    pub order: usize,
    pub smoothing: Smoothing,
    /// Tokens with corpus frequency below this are mapped to `<unk>`.
    pub unk_threshold: u32,
}

impl Default for NGramConfig {
    fn default() -> Self {
        NGramConfig {
            order: 4,
            smoothing: Smoothing::WittenBell,
            unk_threshold: 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
struct ContextCounts {
    total: u64,
    conts: HashMap<u32, u64>,
}

#[derive(Debug, Clone)]
pub struct NGramModel {
    config: NGramConfig,
    vocab: Vocab,
    /// `tables[k]` maps contexts of length `k` to continuation counts.
    tables: Vec<HashMap<Vec<u32>, ContextCounts>>,
}

impl NGramModel {
    pub fn config(&self) -> &NGramConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn order(&self) -> usize {
        self.config.order
    }

    /// Training count of `token` after `context` (exact context length).
    pub fn count(&self, context: &[&str], token: &str) -> u64 {
        if context.len() >= self.config.order {
            return 0;
        }
        let ctx = self.ids(context);
        let tok = self.vocab.id_or_unk(token);
        self.tables[ctx.len()]
            .get(&ctx)
            .and_then(|c| c.conts.get(&tok).copied())
            .unwrap_or(0)
    }

    /// Total training count of all continuations after `context`.
    pub fn context_total(&self, context: &[&str]) -> u64 {
        if context.len() >= self.config.order {
            return 0;
        }
        let ctx = self.ids(context);
        self.tables[ctx.len()].get(&ctx).map(|c| c.total).unwrap_or(0)
    }

    fn ids(&self, texts: &[&str]) -> Vec<u32> {
        texts.iter().map(|t| self.vocab.id_or_unk(t)).collect()
    }

    /// Probability of `token` given the last `order - 1` entries of `context`.
    pub fn prob(&self, token: &str, context: &[&str]) -> f64 {
        let tok = self.vocab.id_or_unk(token);
        let ctx = self.ids(context);
        let start = ctx.len().saturating_sub(self.config.order - 1);
        self.prob_ids(tok, &ctx[start..])
    }

    /// Natural-log probability; always finite and <= 0.
    pub fn log_prob(&self, token: &str, context: &[&str]) -> f64 {
        self.prob(token, context).ln().min(0.0)
    }

    fn prob_ids(&self, token: u32, ctx: &[u32]) -> f64 {
        match self.config.smoothing {
            Smoothing::WittenBell => self.prob_witten_bell(token, ctx),
            Smoothing::None => self.prob_stupid_backoff(token, ctx),
        }
    }

    fn prob_witten_bell(&self, token: u32, ctx: &[u32]) -> f64 {
        if ctx.is_empty() {
            let uni = self.tables[0]
                .get(&Vec::new())
                .expect("unigram table present in trained model");
            let distinct = uni.conts.len() as f64;
            let total = uni.total as f64;
            let uniform = 1.0 / self.vocab.len() as f64;
            let count = uni.conts.get(&token).copied().unwrap_or(0) as f64;
            return (count + distinct * uniform) / (total + distinct);
        }
        match self.tables[ctx.len()].get(ctx) {
            None => self.prob_witten_bell(token, &ctx[1..]),
            Some(c) => {
                let distinct = c.conts.len() as f64;
                let count = c.conts.get(&token).copied().unwrap_or(0) as f64;
                let lower = self.prob_witten_bell(token, &ctx[1..]);
                (count + distinct * lower) / (c.total as f64 + distinct)
            }
        }
    }

    fn prob_stupid_backoff(&self, token: u32, ctx: &[u32]) -> f64 {
        if ctx.is_empty() {
            let uni = self.tables[0]
                .get(&Vec::new())
                .expect("unigram table present in trained model");
            let count = uni.conts.get(&token).copied().unwrap_or(0);
            if count > 0 {
                return count as f64 / uni.total as f64;
            }
            // Floor for tokens never seen at all; keeps logs finite.
            return BACKOFF_FACTOR / (uni.total as f64 + self.vocab.len() as f64);
        }
        match self.tables[ctx.len()].get(ctx) {
            Some(c) if c.conts.contains_key(&token) => {
                c.conts[&token] as f64 / c.total as f64
            }
            _ => BACKOFF_FACTOR * self.prob_stupid_backoff(token, &ctx[1..]),
        }
    }

    /// Rank fill candidates for a gap: each emittable vocabulary token is
    /// scored by `log P(t | left)` plus the log-probability of up to
    /// `order - 1` following tokens under the shifted context. Best first;
    /// ties break toward the lower vocabulary id (first-seen order).
    pub fn fill_candidates(&self, left: &[&str], right: &[&str], k: usize) -> Vec<FillCandidate> {
        let left_ids = self.ids(left);
        let right_ids = self.ids(right);
        let lookahead = right_ids.len().min(self.config.order - 1);
        let mut scored: Vec<(u32, f64)> = Vec::with_capacity(self.vocab.len());
        for cand in self.vocab.emittable_ids() {
            let mut window: Vec<u32> = left_ids.clone();
            window.push(cand);
            let mut score = self.log_prob_ids(cand, &window[..window.len() - 1]);
            for j in 0..lookahead {
                score += self.log_prob_ids(right_ids[j], &window);
                window.push(right_ids[j]);
            }
            scored.push((cand, score));
        }
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        scored
            .into_iter()
            .take(k)
            .map(|(id, score)| FillCandidate {
                text: self.vocab.text(id).to_string(),
                score,
            })
            .collect()
    }

    fn log_prob_ids(&self, token: u32, ctx: &[u32]) -> f64 {
        let start = ctx.len().saturating_sub(self.config.order - 1);
        self.prob_ids(token, &ctx[start..]).ln().min(0.0)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf: Vec<u8> = Vec::new();
        self.write_to(&mut buf)
            .map_err(|e| CoreError::io(path, e))?;
        std::fs::write(path, buf).map_err(|e| CoreError::io(path, e))
    }

    fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_u16::<LittleEndian>(VERSION)?;
        w.write_u32::<LittleEndian>(self.config.order as u32)?;
        w.write_u8(match self.config.smoothing {
            Smoothing::WittenBell => 0,
            Smoothing::None => 1,
        })?;
        w.write_u32::<LittleEndian>(self.config.unk_threshold)?;
        w.write_u32::<LittleEndian>(self.vocab.len() as u32)?;
        for (_, text) in self.vocab.iter() {
            let bytes = text.as_bytes();
            w.write_u32::<LittleEndian>(bytes.len() as u32)?;
            w.write_all(bytes)?;
        }
        for table in &self.tables {
            // Sort contexts so identical models serialize identically.
            let mut ctxs: Vec<&Vec<u32>> = table.keys().collect();
            ctxs.sort();
            w.write_u64::<LittleEndian>(ctxs.len() as u64)?;
            for ctx in ctxs {
                for &id in ctx {
                    w.write_u32::<LittleEndian>(id)?;
                }
                let counts = &table[ctx];
                w.write_u64::<LittleEndian>(counts.total)?;
                w.write_u32::<LittleEndian>(counts.conts.len() as u32)?;
                let mut conts: Vec<(u32, u64)> =
                    counts.conts.iter().map(|(&t, &c)| (t, c)).collect();
                conts.sort();
                for (tok, count) in conts {
                    w.write_u32::<LittleEndian>(tok)?;
                    w.write_u64::<LittleEndian>(count)?;
                }
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<NGramModel> {
        let bytes = std::fs::read(path).map_err(|e| CoreError::io(path, e))?;
        Self::read_from(&mut bytes.as_slice())
    }

    fn read_from<R: Read>(r: &mut R) -> Result<NGramModel> {
        fn bad(field: &'static str, message: impl Into<String>) -> CoreError {
            CoreError::Persistence {
                field,
                message: message.into(),
            }
        }

        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|e| bad("magic", e.to_string()))?;
        if &magic != MAGIC {
            return Err(bad("magic", "not an n-gram model file"));
        }
        let version = r
            .read_u16::<LittleEndian>()
            .map_err(|e| bad("version", e.to_string()))?;
        if version != VERSION {
            return Err(bad("version", format!("unsupported version {version}")));
        }
        let order = r
            .read_u32::<LittleEndian>()
            .map_err(|e| bad("order", e.to_string()))? as usize;
        if order == 0 || order > 16 {
            return Err(bad("order", format!("implausible order {order}")));
        }
        let smoothing = match r.read_u8().map_err(|e| bad("smoothing", e.to_string()))? {
            0 => Smoothing::WittenBell,
            1 => Smoothing::None,
            other => return Err(bad("smoothing", format!("unknown code {other}"))),
        };
        let unk_threshold = r
            .read_u32::<LittleEndian>()
            .map_err(|e| bad("unk_threshold", e.to_string()))?;
        let vocab_len = r
            .read_u32::<LittleEndian>()
            .map_err(|e| bad("vocab", e.to_string()))? as usize;
        let mut vocab = Vocab::new();
        for i in 0..vocab_len {
            let len = r
                .read_u32::<LittleEndian>()
                .map_err(|e| bad("vocab", e.to_string()))? as usize;
            if len > 1 << 20 {
                return Err(bad("vocab", format!("token {i} length {len} too large")));
            }
            let mut buf = vec![0u8; len];
            r.read_exact(&mut buf).map_err(|e| bad("vocab", e.to_string()))?;
            let text = String::from_utf8(buf).map_err(|e| bad("vocab", e.to_string()))?;
            let id = vocab.insert(&text);
            if id != i as u32 {
                return Err(bad("vocab", format!("token {i} out of order")));
            }
        }
        let mut tables = Vec::with_capacity(order);
        for ctx_len in 0..order {
            let n_ctx = r
                .read_u64::<LittleEndian>()
                .map_err(|e| bad("contexts", e.to_string()))?;
            let mut table = HashMap::with_capacity(n_ctx as usize);
            for _ in 0..n_ctx {
                let mut ctx = Vec::with_capacity(ctx_len);
                for _ in 0..ctx_len {
                    ctx.push(
                        r.read_u32::<LittleEndian>()
                            .map_err(|e| bad("contexts", e.to_string()))?,
                    );
                }
                let total = r
                    .read_u64::<LittleEndian>()
                    .map_err(|e| bad("counts", e.to_string()))?;
                let n_conts = r
                    .read_u32::<LittleEndian>()
                    .map_err(|e| bad("counts", e.to_string()))?;
                let mut conts = HashMap::with_capacity(n_conts as usize);
                let mut sum = 0u64;
                for _ in 0..n_conts {
                    let tok = r
                        .read_u32::<LittleEndian>()
                        .map_err(|e| bad("counts", e.to_string()))?;
                    let count = r
                        .read_u64::<LittleEndian>()
                        .map_err(|e| bad("counts", e.to_string()))?;
                    sum += count;
                    conts.insert(tok, count);
                }
                if sum != total {
                    return Err(bad(
                        "counts",
                        format!("context total {total} != continuation sum {sum}"),
                    ));
                }
                table.insert(ctx, ContextCounts { total, conts });
            }
            tables.push(table);
        }
        let mut tail = [0u8; 1];
        if r.read(&mut tail).map_err(|e| bad("trailer", e.to_string()))? != 0 {
            return Err(bad("trailer", "trailing bytes after model data"));
        }
        Ok(NGramModel {
            config: NGramConfig {
                order,
                smoothing,
                unk_threshold,
            },
            vocab,
            tables,
        })
    }
}

/// Count n-grams of orders `1..=config.order` over every corpus file.
pub fn train_ngram(corpus: &Corpus, config: NGramConfig) -> Result<NGramModel> {
    if config.order < 1 {
        return Err(CoreError::config("order", "order must be >= 1"));
    }
    if corpus.files.is_empty() {
        return Err(CoreError::EmptyCorpus);
    }

    // Pass 1: raw frequencies decide what enters the vocabulary.
    let mut freq: HashMap<&str, u32> = HashMap::new();
    for file in &corpus.files {
        for tok in file.stream.tokens() {
            *freq.entry(tok.text.as_str()).or_insert(0) += 1;
        }
    }
    let mut vocab = Vocab::new();
    for file in &corpus.files {
        for tok in file.stream.tokens() {
            if freq[tok.text.as_str()] >= config.unk_threshold {
                vocab.insert(&tok.text);
            }
        }
    }

    // Pass 2: count continuations per context length.
    let mut tables: Vec<HashMap<Vec<u32>, ContextCounts>> = vec![HashMap::new(); config.order];
    for file in &corpus.files {
        let ids: Vec<u32> = file
            .stream
            .tokens()
            .iter()
            .map(|t| vocab.id_or_unk(&t.text))
            .collect();
        for ctx_len in 0..config.order {
            for i in ctx_len..ids.len() {
                let ctx = ids[i - ctx_len..i].to_vec();
                let entry = tables[ctx_len].entry(ctx).or_default();
                entry.total += 1;
                *entry.conts.entry(ids[i]).or_insert(0) += 1;
            }
        }
    }

    Ok(NGramModel {
        config,
        vocab,
        tables,
    })
}

impl Scorer for NGramModel {
    fn name(&self) -> &'static str {
        "ngram"
    }

    fn can_score(&self) -> bool {
        true
    }

    fn can_fill(&self) -> bool {
        true
    }

    fn score_stream(&self, stream: &TokenStream) -> Result<Vec<f64>> {
        let texts: Vec<&str> = stream.tokens().iter().map(|t| t.text.as_str()).collect();
        Ok((0..texts.len())
            .map(|i| self.log_prob(texts[i], &texts[..i]))
            .collect())
    }

    fn fill(&self, left: &[String], right: &[String], k: usize) -> Result<Vec<FillCandidate>> {
        let left: Vec<&str> = left.iter().map(String::as_str).collect();
        let right: Vec<&str> = right.iter().map(String::as_str).collect();
        Ok(self.fill_candidates(&left, &right, k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CorpusFile;
    use crate::profile::load_profile;
    use crate::tokenizer::tokenize;
    use crate::vocab::{MASK, UNK};
    use std::path::PathBuf;

    fn corpus_of(texts: &[&str]) -> Corpus {
        let profile = load_profile("mini").unwrap();
        Corpus {
            files: texts
                .iter()
                .enumerate()
                .map(|(i, t)| CorpusFile {
                    path: PathBuf::from(format!("mem-{i}")),
                    stream: tokenize(t, &profile),
                })
                .collect(),
            rejected: vec![],
        }
    }

    fn mle(order: usize) -> NGramConfig {
        NGramConfig {
            order,
            smoothing: Smoothing::None,
            unk_threshold: 1,
        }
    }

    #[test]
    fn mle_bigram_worked_example() {
        // corpus "a b a b a": bigrams (a,b) x2, (b,a) x2 -> P(b|a) = 1.0
        let model = train_ngram(&corpus_of(&["a b a b a"]), mle(2)).unwrap();
        assert_eq!(model.prob("b", &["a"]), 1.0);
        assert_eq!(model.log_prob("b", &["a"]), 0.0);
        assert_eq!(model.count(&["a"], "b"), 2);
        assert_eq!(model.context_total(&["a"]), 2);
        // observed continuations of a seen context sum to exactly 1 under MLE
        assert_eq!(model.prob("b", &["a"]) + 0.0, 1.0);
        assert_eq!(model.prob("a", &["b"]), 1.0);
    }

    #[test]
    fn unseen_context_backs_off_to_unigram() {
        let model = train_ngram(&corpus_of(&["a b a b a"]), mle(2)).unwrap();
        // context "q" is unseen -> 0.4 * unigram(b) = 0.4 * 2/5
        let p = model.prob("b", &["q"]);
        assert!((p - 0.4 * 0.4).abs() < 1e-15, "{p}");
        // never-seen token stays finite
        assert!(model.log_prob("zzz", &["a"]).is_finite());
    }

    #[test]
    fn unk_threshold_maps_rare_tokens() {
        let cfg = NGramConfig {
            order: 2,
            smoothing: Smoothing::None,
            unk_threshold: 2,
        };
        let model = train_ngram(&corpus_of(&["a b a b q"]), cfg).unwrap();
        assert_eq!(model.vocab().id_of("q"), None);
        // "q" is scored as <unk>, which was counted once
        assert!((model.prob("q", &[]) - 0.2).abs() < 1e-15);
        assert_eq!(model.count(&[], UNK), 1);
    }

    #[test]
    fn witten_bell_hand_computed() {
        // corpus "a b a b a": N=5, unigrams a:3 b:2, distinct=2, |V|=4.
        // P_wb(a) = (3 + 2*(1/4)) / (5 + 2) = 0.5
        // P_wb(b) = (2 + 0.5) / 7 = 2.5/7
        // P_wb(b|a): context a has total 2, distinct 1
        //   -> (2 + 1 * 2.5/7) / (2 + 1) = 16.5/21
        let cfg = NGramConfig {
            order: 2,
            smoothing: Smoothing::WittenBell,
            unk_threshold: 1,
        };
        let model = train_ngram(&corpus_of(&["a b a b a"]), cfg).unwrap();
        assert!((model.prob("a", &[]) - 0.5).abs() < 1e-12);
        assert!((model.prob("b", &[]) - 2.5 / 7.0).abs() < 1e-12);
        assert!((model.prob("b", &["a"]) - 16.5 / 21.0).abs() < 1e-12);
    }

    #[test]
    fn witten_bell_normalizes_over_vocab() {
        let cfg = NGramConfig {
            order: 3,
            smoothing: Smoothing::WittenBell,
            unk_threshold: 1,
        };
        let model = train_ngram(
            &corpus_of(&["a b c a b d", "b c a a", "let x = 1 + 2"]),
            cfg,
        )
        .unwrap();
        let contexts: Vec<Vec<&str>> = vec![
            vec![],
            vec!["a"],
            vec!["zzz"],
            vec!["a", "b"],
            vec!["b", "q"],
            vec!["=", "1"],
        ];
        for ctx in contexts {
            let sum: f64 = model
                .vocab()
                .iter()
                .map(|(_, text)| model.prob(text, &ctx))
                .sum();
            assert!((sum - 1.0).abs() < 1e-9, "sum {sum} for ctx {ctx:?}");
        }
    }

    #[test]
    fn fill_candidates_ranked_and_clamped() {
        let model = train_ngram(&corpus_of(&["a b a b"]), mle(2)).unwrap();
        let top = model.fill_candidates(&["a"], &[], 1);
        assert_eq!(top.len(), 1);
        assert_eq!(top[0].text, "b");
        // k larger than the emittable vocab returns the full ranking
        let all = model.fill_candidates(&["a"], &[], 10);
        assert_eq!(all.len(), 2); // a and b; <unk>/<mask> never offered
        assert!(all.iter().all(|c| c.text != UNK && c.text != MASK));
        assert!(all[0].score >= all[1].score);
    }

    #[test]
    fn fill_uses_right_context_lookahead() {
        // "x + 1" vs "x - 2": with right context ["1"], "+" must win.
        let model = train_ngram(&corpus_of(&["x + 1 x + 1 x - 2"]), mle(3)).unwrap();
        let left = vec!["x"];
        let top = model.fill_candidates(&left, &["1"], 2);
        assert_eq!(top[0].text, "+");
    }

    #[test]
    fn order_zero_rejected() {
        let err = train_ngram(&corpus_of(&["a"]), mle(0)).unwrap_err();
        assert!(matches!(err, CoreError::Config { .. }));
    }

    #[test]
    fn adding_a_file_never_decreases_counts() {
        let base = train_ngram(&corpus_of(&["a b a", "b c"]), mle(3)).unwrap();
        let bigger = train_ngram(&corpus_of(&["a b a", "b c", "a b c d"]), mle(3)).unwrap();
        for (ctx_len, table) in base.tables.iter().enumerate() {
            for (ctx, counts) in table {
                let big = bigger.tables[ctx_len]
                    .get(ctx)
                    .unwrap_or_else(|| panic!("context {ctx:?} vanished"));
                assert!(big.total >= counts.total);
                for (tok, c) in &counts.conts {
                    assert!(big.conts.get(tok).copied().unwrap_or(0) >= *c);
                }
            }
        }
    }

    #[test]
    fn persistence_round_trips_bit_exact() {
        let cfg = NGramConfig {
            order: 4,
            smoothing: Smoothing::WittenBell,
            unk_threshold: 1,
        };
        let model = train_ngram(
            &corpus_of(&["let x = 1\nlet y = x + 2\n", "a b a b a", "x + 1 x - 2"]),
            cfg,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.lng");
        model.save(&path).unwrap();
        let loaded = NGramModel::load(&path).unwrap();
        assert_eq!(model.vocab(), loaded.vocab());
        assert_eq!(model.tables, loaded.tables);
        // scores are bit-exact, not merely close
        let queries = [
            ("x", vec!["let"]),
            ("+", vec!["x"]),
            ("1", vec!["=", "x", "+"]),
            ("zzz", vec!["a", "b"]),
        ];
        for (tok, ctx) in queries {
            let ctx: Vec<&str> = ctx;
            assert_eq!(
                model.log_prob(tok, &ctx).to_bits(),
                loaded.log_prob(tok, &ctx).to_bits()
            );
        }
        // saving the loaded model reproduces the same bytes
        let path2 = dir.path().join("model2.lng");
        loaded.save(&path2).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn corrupted_files_name_the_failing_field() {
        let model = train_ngram(&corpus_of(&["a b"]), mle(2)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.lng");
        model.save(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();

        // wrong magic
        let mut bad = bytes.clone();
        bad[0] = b'X';
        std::fs::write(&path, &bad).unwrap();
        match NGramModel::load(&path).unwrap_err() {
            CoreError::Persistence { field, .. } => assert_eq!(field, "magic"),
            other => panic!("unexpected error {other}"),
        }

        // truncated counts
        std::fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        assert!(matches!(
            NGramModel::load(&path).unwrap_err(),
            CoreError::Persistence { .. }
        ));
    }

    #[test]
    fn mle_matches_brute_force_counter() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let alphabet = ["a", "b", "c", "d", "+", "="];
        let tokens: Vec<&str> = (0..800)
            .map(|_| alphabet[rng.random_range(0..alphabet.len())])
            .collect();
        let text = tokens.join(" ");
        let model = train_ngram(&corpus_of(&[&text]), mle(3)).unwrap();

        // Independent counting straight off the token vector.
        let count_seq = |needle: &[&str]| -> u64 {
            if needle.is_empty() {
                return tokens.len() as u64;
            }
            tokens
                .windows(needle.len())
                .filter(|w| w == &needle)
                .count() as u64
        };
        for _ in 0..200 {
            let ctx_len = rng.random_range(0..3usize);
            let start = rng.random_range(0..tokens.len() - ctx_len);
            let ctx = &tokens[start..start + ctx_len];
            let tok = tokens[start + ctx_len];
            let mut full: Vec<&str> = ctx.to_vec();
            full.push(tok);
            let expect_count = count_seq(&full);
            // context total counts windows with one more following token
            let mut ctx_total = 0u64;
            for w in tokens.windows(ctx_len + 1) {
                if &w[..ctx_len] == ctx {
                    ctx_total += 1;
                }
            }
            assert_eq!(model.count(&full[..ctx_len], tok), expect_count);
            assert_eq!(model.context_total(ctx), ctx_total);
            if expect_count > 0 {
                let p = model.prob(tok, ctx);
                assert_eq!(p, expect_count as f64 / ctx_total as f64);
            }
        }
    }
}
