use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LanguageModel, LogProbVector};
use crate::corpus::{ParallelPair, TokenId, Vocabulary};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"RFLM";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NgramConfig {
    pub order: usize,
    /// Absolute discount subtracted from every observed count, in (0, 1).
    pub discount: f64,
}

impl Default for NgramConfig {
    fn default() -> Self {
        NgramConfig {
            order: 4,
            discount: 0.75,
        }
    }
}

impl NgramConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order < 2 {
            return Err(Error::param("order", format!("must be >= 2, got {}", self.order)));
        }
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return Err(Error::param(
                "discount",
                format!("must lie in (0, 1), got {}", self.discount),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct HistoryStats {
    total: u64,
    /// (next symbol, count), sorted by symbol.
    next: Vec<(TokenId, u32)>,
}

/// Interpolated absolute-discounting n-gram model over context-prefixed
/// reviews.
///
/// Each training example is laid out as
/// `BOS^(n-1) context... SEP review... EOS` and only review positions (and
/// the final EOS) are counted as predictions. Context therefore acts through
/// the histories that straddle the separator.
///
/// Probabilities are built bottom-up from a uniform floor:
///
/// ```text
/// p_k(w | h) = max(c(h,w) - D, 0) / c(h) + D * N(h) / c(h) * p_{k-1}(w | h')
/// ```
///
/// where `N(h)` is the number of distinct successors of `h` and `h'` drops
/// the oldest symbol. An unseen history contributes nothing and leaves the
/// lower-order distribution in place.
#[derive(Debug, Clone)]
pub struct NgramModel {
    config: NgramConfig,
    vocab: Vocabulary,
    /// `tables[k]` holds histories of length `k`.
    tables: Vec<HashMap<Box<[TokenId]>, HistoryStats>>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    config: NgramConfig,
    vocab: Vocabulary,
    tables: Vec<Vec<(Vec<TokenId>, HistoryStats)>>,
}

pub fn train_lm(
    train: &[ParallelPair],
    vocab: &Vocabulary,
    config: NgramConfig,
) -> Result<NgramModel> {
    NgramModel::train(train, vocab, config)
}

impl NgramModel {
    pub fn train(train: &[ParallelPair], vocab: &Vocabulary, config: NgramConfig) -> Result<Self> {
        config.validate()?;
        if train.is_empty() {
            return Err(Error::Empty("training pairs"));
        }
        let order = config.order;
        let mut raw: Vec<HashMap<Box<[TokenId]>, HashMap<TokenId, u32>>> =
            (0..order).map(|_| HashMap::new()).collect();
        let mut seq = Vec::new();
        for pair in train {
            let ctx = vocab.ids(pair.context.tokens().iter());
            let review = vocab.ids(pair.review.iter());
            let start = layout(vocab, order, &ctx, &review, &mut seq);
            seq.push(vocab.eos_id());
            for pos in start..seq.len() {
                let target = seq[pos];
                for (k, table) in raw.iter_mut().enumerate() {
                    let hist = &seq[pos - k..pos];
                    let counts = match table.get_mut(hist) {
                        Some(c) => c,
                        None => table.entry(hist.into()).or_default(),
                    };
                    *counts.entry(target).or_default() += 1;
                }
            }
        }
        let tables = raw
            .into_iter()
            .map(|t| {
                t.into_iter()
                    .map(|(h, counts)| {
                        let mut next: Vec<_> = counts.into_iter().collect();
                        next.sort_unstable();
                        let total = next.iter().map(|&(_, c)| c as u64).sum();
                        (h, HistoryStats { total, next })
                    })
                    .collect()
            })
            .collect();
        Ok(NgramModel {
            config,
            vocab: vocab.clone(),
            tables,
        })
    }

    pub fn config(&self) -> NgramConfig {
        self.config
    }

    pub fn order(&self) -> usize {
        self.config.order
    }

    /// Fills `probs` with `p(· | history)` where `history` holds the last
    /// `order - 1` symbols.
    fn fill_probs(&self, history: &[TokenId], probs: &mut [f64]) {
        let n = probs.len();
        probs.fill(1.0 / n as f64);
        let d = self.config.discount;
        for (k, table) in self.tables.iter().enumerate() {
            let Some(stats) = table.get(&history[history.len() - k..]) else {
                break;
            };
            let total = stats.total as f64;
            let gamma = d * stats.next.len() as f64 / total;
            probs.iter_mut().for_each(|p| *p *= gamma);
            for &(w, c) in &stats.next {
                probs[w as usize] += (c as f64 - d) / total;
            }
        }
    }

    fn history(&self, context: &[TokenId], prefix: &[TokenId]) -> Vec<TokenId> {
        let mut seq = Vec::with_capacity(context.len() + prefix.len() + self.order());
        layout(&self.vocab, self.order(), context, prefix, &mut seq);
        seq.split_off(seq.len() - (self.order() - 1))
    }

    /// Raw probability of every output, for tests and diagnostics.
    pub fn next_token_probs_ids(&self, context: &[TokenId], prefix: &[TokenId]) -> Vec<f64> {
        let mut probs = vec![0.0; self.vocab.output_size()];
        self.fill_probs(&self.history(context, prefix), &mut probs);
        probs
    }

    /// Number of stored histories of each length.
    pub fn table_sizes(&self) -> Vec<usize> {
        self.tables.iter().map(HashMap::len).collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let tables = self
            .tables
            .iter()
            .map(|t| {
                let mut rows: Vec<_> = t.iter().map(|(h, s)| (h.to_vec(), s.clone())).collect();
                rows.sort_unstable_by(|a, b| a.0.cmp(&b.0));
                rows
            })
            .collect();
        let file = ModelFile {
            config: self.config,
            vocab: self.vocab.clone(),
            tables,
        };
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(self.vocab.hash().as_bytes());
        out.extend(bincode::serialize(&file).expect("model serializes"));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let header = 4 + 4 + 64;
        if bytes.len() < header || &bytes[..4] != MAGIC {
            return Err(Error::BadModel("not a language model file".into()));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::BadModel(format!("unsupported version {version}")));
        }
        let stored_hash = std::str::from_utf8(&bytes[8..header])
            .map_err(|_| Error::BadModel("corrupt vocabulary hash".into()))?
            .to_owned();
        let file: ModelFile = bincode::deserialize(&bytes[header..])
            .map_err(|e| Error::BadModel(e.to_string()))?;
        let mut vocab = file.vocab;
        vocab.rebuild_index();
        if vocab.hash() != stored_hash {
            return Err(Error::VocabularyMismatch {
                expected: stored_hash,
                found: vocab.hash(),
            });
        }
        file.config.validate()?;
        let tables = file
            .tables
            .into_iter()
            .map(|rows| rows.into_iter().map(|(h, s)| (h.into_boxed_slice(), s)).collect())
            .collect();
        Ok(NgramModel {
            config: file.config,
            vocab,
            tables,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    /// Loads a model and checks it was trained against `vocab`.
    pub fn load_with_vocabulary(path: &Path, vocab: &Vocabulary) -> Result<Self> {
        let model = Self::load(path)?;
        if model.vocab.hash() != vocab.hash() {
            return Err(Error::VocabularyMismatch {
                expected: model.vocab.hash(),
                found: vocab.hash(),
            });
        }
        Ok(model)
    }
}

/// Writes `BOS^(n-1) context SEP review` into `seq` and returns the index of
/// the first review position.
fn layout(
    vocab: &Vocabulary,
    order: usize,
    context: &[TokenId],
    review: &[TokenId],
    seq: &mut Vec<TokenId>,
) -> usize {
    let bos = vocab.eos_id() + 1;
    let sep = vocab.eos_id() + 2;
    seq.clear();
    seq.extend(std::iter::repeat(bos).take(order - 1));
    seq.extend_from_slice(context);
    seq.push(sep);
    let start = seq.len();
    seq.extend_from_slice(review);
    start
}

impl LanguageModel for NgramModel {
    fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    fn next_token_logprobs_ids(&self, context: &[TokenId], prefix: &[TokenId]) -> LogProbVector {
        let mut probs = self.next_token_probs_ids(context, prefix);
        probs.iter_mut().for_each(|p| *p = p.ln());
        LogProbVector::new(probs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocabulary, Context, TokenSequence};
    use crate::lm::{greedy_decode, next_token_logprobs, perplexity};

    fn pair(ctx: &str, review: &str) -> ParallelPair {
        ParallelPair {
            context: Context::parse(ctx),
            review: TokenSequence::from_cleaned(review),
        }
    }

    fn model(pairs: &[ParallelPair], order: usize, discount: f64) -> NgramModel {
        let vocab = build_vocabulary(pairs, 1).unwrap();
        train_lm(pairs, &vocab, NgramConfig { order, discount }).unwrap()
    }

    #[test]
    fn rejects_order_one_and_empty() {
        let pairs = vec![pair("1 a", "b")];
        let vocab = build_vocabulary(&pairs, 1).unwrap();
        assert!(train_lm(&pairs, &vocab, NgramConfig { order: 1, discount: 0.5 }).is_err());
        assert!(train_lm(&[], &vocab, NgramConfig::default()).is_err());
        assert!(train_lm(&pairs, &vocab, NgramConfig { order: 2, discount: 0.0 }).is_err());
    }

    #[test]
    fn bigram_hand_computed() {
        // corpus: "x" -> "a b", "x" -> "a c"; order 2, D = 0.5
        let pairs = vec![pair("x", "a b"), pair("x", "a c")];
        let lm = model(&pairs, 2, 0.5);
        let v = lm.vocabulary().clone();
        // vocab: <unk>, a(2), x(2), b(1), c(1) sorted by count then text
        assert_eq!(v.tokens(), &["<unk>", "a", "x", "b", "c"]);
        let n_out = 6.0; // 5 tokens + EOS
        let uniform = 1.0 / n_out;
        // unigram predictions over review positions + EOS: a,b,EOS,a,c,EOS  (total 6, 4 types)
        let p1 = |c: f64| (c - 0.5f64).max(0.0) / 6.0 + 0.5 * 4.0 / 6.0 * uniform;
        // history "a": successors b(1), c(1); total 2, 2 types
        let gamma_a = 0.5 * 2.0 / 2.0;
        let expected_b = 0.5 / 2.0 + gamma_a * p1(1.0);
        let expected_unk = gamma_a * p1(0.0);
        let expected_a = gamma_a * p1(2.0);
        let probs = lm.next_token_probs_ids(&v.ids(["x"]), &v.ids(["a"]));
        assert!((probs[3] - expected_b).abs() < 1e-12);
        assert!((probs[4] - expected_b).abs() < 1e-12);
        assert!((probs[0] - expected_unk).abs() < 1e-12);
        assert!((probs[1] - expected_a).abs() < 1e-12);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn argmax_after_good_is_food() {
        let pairs = vec![
            pair("5 cafe", "good food ."),
            pair("4 cafe", "really good food !"),
            pair("3 cafe", "the food was good ."),
            pair("5 diner", "good food and good service"),
        ];
        let lm = model(&pairs, 2, 0.75);
        let v = lm.vocabulary();
        let lp = next_token_logprobs(&lm, &Context::parse("5 cafe"), &TokenSequence::from_cleaned("good"));
        // successors of "good": food(3), .(1), service(1)
        assert_eq!(v.token(lp.argmax().unwrap()), "food");
    }

    #[test]
    fn unseen_history_equals_lower_order() {
        let pairs = vec![pair("1 a", "p q r"), pair("2 b", "q s")];
        let lm = model(&pairs, 3, 0.5);
        let v = lm.vocabulary();
        // history (s, p) never occurs at order 3; (p) has successor q
        let probs3 = lm.next_token_probs_ids(&v.ids(["1", "a"]), &v.ids(["s", "p"]));
        let bigram_only = {
            let lm2 = model(&pairs, 2, 0.5);
            lm2.next_token_probs_ids(&v.ids(["1"]), &v.ids(["p"]))
        };
        for (a, b) in probs3.iter().zip(&bigram_only) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn normalized_and_finite_everywhere() {
        let pairs = vec![
            pair("5 a b", "great food , great service ."),
            pair("4 a c", "the food was great ."),
            pair("1 d", "cold food ."),
        ];
        let lm = model(&pairs, 4, 0.75);
        let v = lm.vocabulary();
        let prefixes: [&[&str]; 4] = [&[], &["great"], &["the", "food"], &["zzz", "cold", "food"]];
        for ctx in ["5 a b", "1 d", "9 unknown"] {
            for p in prefixes {
                let lp = lm.next_token_logprobs_ids(&v.ids(ctx.split(' ')), &v.ids(p.iter().copied()));
                assert_eq!(lp.len(), v.output_size());
                assert!(lp.log_sum_exp().abs() < 1e-9);
                assert!(lp.as_slice().iter().all(|x| x.is_finite()));
            }
        }
    }

    #[test]
    fn greedy_reproduces_dominant_sentence() {
        let mut pairs = vec![];
        for _ in 0..20 {
            pairs.push(pair("5 grill", "the burger was amazing ."));
        }
        pairs.push(pair("5 grill", "the fries were soggy ."));
        let lm = model(&pairs, 3, 0.5);
        let out = greedy_decode(&lm, &Context::parse("5 grill"), 50);
        assert_eq!(out.to_text(), "the burger was amazing .");
        let short = greedy_decode(&lm, &Context::parse("5 grill"), 2);
        assert_eq!(short.to_text(), "the burger");
        assert_eq!(greedy_decode(&lm, &Context::parse("5 grill"), 50), out);
    }

    #[test]
    fn memorization_perplexity_near_one() {
        let pairs = vec![pair("3 z", "one two three four")];
        let lm = model(&pairs, 8, 1e-9);
        let ppl = perplexity(&lm, &pairs).unwrap();
        assert!(ppl < 1.0 + 1e-6, "{ppl}");
    }

    #[test]
    fn three_sentence_perplexity_hand_computed() {
        // order 2, D = 0.5; predictions counted per review token plus EOS
        let pairs = vec![pair("c", "a"), pair("c", "a b"), pair("c", "b")];
        let lm = model(&pairs, 2, 0.5);
        let v = lm.vocabulary();
        assert_eq!(v.tokens(), &["<unk>", "c", "a", "b"]);
        let n_out = 5.0;
        // unigram events: a, E, a, b, E, b, E  -> total 7; a2 b2 E3; 3 types
        let uni = |c: f64| (c - 0.5f64).max(0.0) / 7.0 + 0.5 * 3.0 / 7.0 / n_out;
        let (pa, pb, pe) = (uni(2.0), uni(2.0), uni(3.0));
        // history SEP: a(2), b(1); total 3, 2 types
        let g_sep = 0.5 * 2.0 / 3.0;
        let sep_a = 1.5 / 3.0 + g_sep * pa;
        let sep_b = 0.5 / 3.0 + g_sep * pb;
        // history a: E(1), b(1); total 2, 2 types
        let g_a = 0.5;
        let a_e = 0.5 / 2.0 + g_a * pe;
        let a_b = 0.5 / 2.0 + g_a * pb;
        // history b: E(2); total 2, 1 type
        let g_b = 0.5 / 2.0;
        let b_e = 1.5 / 2.0 + g_b * pe;
        let logs = [sep_a, a_e, sep_a, a_b, b_e, sep_b, b_e].map(f64::ln);
        let expected = (-logs.iter().sum::<f64>() / 7.0).exp();
        let ppl = perplexity(&lm, &pairs).unwrap();
        assert!((ppl - expected).abs() < 1e-12, "{ppl} vs {expected}");
    }

    #[test]
    fn save_load_bit_identical() {
        let pairs = vec![pair("5 a b", "x y z ."), pair("4 a", "y z y .")];
        let vocab = build_vocabulary(&pairs, 1).unwrap();
        let a = train_lm(&pairs, &vocab, NgramConfig::default()).unwrap();
        let b = train_lm(&pairs, &vocab, NgramConfig::default()).unwrap();
        assert_eq!(a.to_bytes(), b.to_bytes());

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lm.bin");
        a.save(&path).unwrap();
        let back = NgramModel::load_with_vocabulary(&path, &vocab).unwrap();
        assert_eq!(back.to_bytes(), a.to_bytes());

        let other = build_vocabulary(&[pair("1 q", "r")], 1).unwrap();
        assert!(matches!(
            NgramModel::load_with_vocabulary(&path, &other),
            Err(Error::VocabularyMismatch { .. })
        ));
        assert!(NgramModel::from_bytes(b"nope").is_err());
    }
}
