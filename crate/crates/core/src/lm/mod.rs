//! Conditional next-token scoring.
//!
//! Decoding only needs a normalized log-probability vector per step, so any
//! model implementing [`LanguageModel`] can drive the penalty decoder.

mod ngram;

pub use ngram::{train_lm, NgramConfig, NgramModel};

use std::ops::{Index, IndexMut};

use crate::corpus::{Context, ParallelPair, TokenId, TokenSequence, Vocabulary, UNK_ID};
use crate::error::{Error, Result};

/// Log-probabilities over every vocabulary token followed by EOS.
#[derive(Debug, Clone, PartialEq)]
pub struct LogProbVector(Vec<f64>);

impl LogProbVector {
    pub fn new(values: Vec<f64>) -> Self {
        LogProbVector(values)
    }

    pub fn from_probs(probs: &[f64]) -> Self {
        LogProbVector(probs.iter().map(|p| p.ln()).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn eos_id(&self) -> TokenId {
        (self.0.len() - 1) as TokenId
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// `ln Σ exp(v)`, stable for large negative entries.
    pub fn log_sum_exp(&self) -> f64 {
        let max = self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return max;
        }
        max + self.0.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
    }

    /// Index of the largest entry; ties go to the lowest index.
    /// Returns `None` when every entry is −∞ or NaN.
    pub fn argmax(&self) -> Option<TokenId> {
        self.argmax_excluding(&[])
    }

    pub fn argmax_excluding(&self, skip: &[TokenId]) -> Option<TokenId> {
        let mut best: Option<(TokenId, f64)> = None;
        for (i, &v) in self.0.iter().enumerate() {
            let i = i as TokenId;
            if v == f64::NEG_INFINITY || v.is_nan() || skip.contains(&i) {
                continue;
            }
            if best.map_or(true, |(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        best.map(|(i, _)| i)
    }
}

impl Index<TokenId> for LogProbVector {
    type Output = f64;
    fn index(&self, i: TokenId) -> &f64 {
        &self.0[i as usize]
    }
}

impl IndexMut<TokenId> for LogProbVector {
    fn index_mut(&mut self, i: TokenId) -> &mut f64 {
        &mut self.0[i as usize]
    }
}

/// A model of `p(token | context, prefix)` over `vocabulary() ∪ {EOS}`.
///
/// Implementations must return a normalized vector of length
/// `vocabulary().output_size()` with every entry finite.
pub trait LanguageModel: Sync {
    fn vocabulary(&self) -> &Vocabulary;

    fn next_token_logprobs_ids(&self, context: &[TokenId], prefix: &[TokenId]) -> LogProbVector;

    /// Token ids the decoder must never emit (e.g. the unknown-word token).
    fn banned_ids(&self) -> Vec<TokenId> {
        vec![UNK_ID]
    }
}

pub fn next_token_logprobs<M: LanguageModel + ?Sized>(
    lm: &M,
    context: &Context,
    prefix: &TokenSequence,
) -> LogProbVector {
    let v = lm.vocabulary();
    lm.next_token_logprobs_ids(&v.ids(context.tokens().iter()), &v.ids(prefix.iter()))
}

/// `exp` of the mean negative log-probability per predicted token, EOS
/// included.
pub fn perplexity<M: LanguageModel + ?Sized>(lm: &M, eval: &[ParallelPair]) -> Result<f64> {
    if eval.is_empty() {
        return Err(Error::Empty("evaluation pairs"));
    }
    let v = lm.vocabulary();
    let mut nll = 0.0;
    let mut n = 0usize;
    for pair in eval {
        let ctx = v.ids(pair.context.tokens().iter());
        let review = v.ids(pair.review.iter());
        for k in 0..=review.len() {
            let target = review.get(k).copied().unwrap_or_else(|| v.eos_id());
            let lp = lm.next_token_logprobs_ids(&ctx, &review[..k]);
            nll -= lp[target];
            n += 1;
        }
    }
    Ok((nll / n as f64).exp())
}

/// Unpenalized greedy decoding: argmax at every step until EOS or `max_len`
/// tokens. The returned sequence excludes EOS.
pub fn greedy_decode<M: LanguageModel + ?Sized>(
    lm: &M,
    context: &Context,
    max_len: usize,
) -> TokenSequence {
    let v = lm.vocabulary();
    let ctx = v.ids(context.tokens().iter());
    let ids = greedy_decode_ids(lm, &ctx, max_len);
    ids.iter().map(|&id| v.token(id)).collect()
}

pub fn greedy_decode_ids<M: LanguageModel + ?Sized>(
    lm: &M,
    context: &[TokenId],
    max_len: usize,
) -> Vec<TokenId> {
    let eos = lm.vocabulary().eos_id();
    let banned = lm.banned_ids();
    let mut out = Vec::new();
    while out.len() < max_len {
        let lp = lm.next_token_logprobs_ids(context, &out);
        match lp.argmax_excluding(&banned) {
            Some(id) if id != eos => out.push(id),
            _ => break,
        }
    }
    out
}

/// Equal probability for every output; mostly useful as a reference.
#[derive(Debug, Clone)]
pub struct UniformModel {
    vocab: Vocabulary,
}

impl UniformModel {
    pub fn new(vocab: Vocabulary) -> Self {
        UniformModel { vocab }
    }
}

impl LanguageModel for UniformModel {
    fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    fn next_token_logprobs_ids(&self, _: &[TokenId], _: &[TokenId]) -> LogProbVector {
        let n = self.vocab.output_size();
        LogProbVector(vec![-(n as f64).ln(); n])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_ties_lowest_index() {
        let v = LogProbVector::new(vec![-2.0, -1.0, -1.0, f64::NEG_INFINITY]);
        assert_eq!(v.argmax(), Some(1));
        assert_eq!(v.argmax_excluding(&[1]), Some(2));
        let dead = LogProbVector::new(vec![f64::NEG_INFINITY; 3]);
        assert_eq!(dead.argmax(), None);
    }

    #[test]
    fn uniform_perplexity_is_output_size() {
        let vocab = Vocabulary::from_tokens(["a", "b", "c", "d"]);
        let lm = UniformModel::new(vocab);
        let eval = vec![ParallelPair {
            context: Context::parse("5 x"),
            review: TokenSequence::from_cleaned("a b zz c"),
        }];
        let ppl = perplexity(&lm, &eval).unwrap();
        assert!((ppl - 6.0).abs() < 1e-9, "{ppl}");
        assert!(perplexity(&lm, &[]).is_err());
    }

    #[test]
    fn log_sum_exp_of_normalized() {
        let v = LogProbVector::from_probs(&[0.25, 0.25, 0.5]);
        assert!(v.log_sum_exp().abs() < 1e-12);
    }
}
