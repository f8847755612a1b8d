//! Penalty-augmented greedy decoding.
//!
//! Every step scores the prefix with the language model, then adds three
//! kinds of non-positive log-likelihood penalties before taking the argmax:
//!
//! * a review penalty `λ` on a Bernoulli(`b`) subset of the vocabulary drawn
//!   once per review,
//! * a start penalty `λ·α^i` on a fresh Bernoulli(`b`) subset drawn at step `i`,
//! * a memory penalty `λ` on every token already emitted in this review.
//!
//! Tokens in the [`GrammarSet`] take half of each penalty. EOS is never
//! masked; it is only controlled by the length bounds.

mod grammar;

pub use grammar::GrammarSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Context, TokenId, TokenSequence};
use crate::error::{Error, Result};
use crate::lm::{LanguageModel, LogProbVector};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationParams {
    /// Probability that a token is penalized by a Bernoulli mask.
    pub b: f64,
    /// Soft penalty in log-likelihood units, `<= 0`.
    pub lambda: f64,
    /// Per-step decay of the start penalty, in (0, 1].
    pub alpha: f64,
    pub min_len: usize,
    pub max_len: usize,
    pub p_typo: f64,
    pub p_spell: f64,
    pub seed: u64,
}

impl Default for GenerationParams {
    fn default() -> Self {
        GenerationParams {
            b: 0.3,
            lambda: -5.0,
            alpha: 2.0 / 3.0,
            min_len: 10,
            max_len: 50,
            p_typo: 0.01,
            p_spell: 0.01,
            seed: 0,
        }
    }
}

impl GenerationParams {
    /// Parameters with every penalty switched off.
    pub fn unpenalized() -> Self {
        GenerationParams {
            b: 0.0,
            lambda: 0.0,
            ..Default::default()
        }
    }

    pub fn with_penalty(b: f64, lambda: f64) -> Self {
        GenerationParams {
            b,
            lambda,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &'static str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::param(name, format!("must lie in [0, 1], got {v}")))
            }
        };
        unit("b", self.b)?;
        unit("p_typo", self.p_typo)?;
        unit("p_spell", self.p_spell)?;
        if !(self.lambda <= 0.0 && self.lambda.is_finite()) {
            return Err(Error::param("lambda", format!("must be finite and <= 0, got {}", self.lambda)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::param("alpha", format!("must lie in (0, 1], got {}", self.alpha)));
        }
        if self.min_len > self.max_len {
            return Err(Error::param(
                "min_len",
                format!("{} exceeds max_len {}", self.min_len, self.max_len),
            ));
        }
        Ok(())
    }

    /// Magnitude of the start penalty at `step`: `|λ|·α^step`.
    pub fn start_penalty(&self, step: usize) -> f64 {
        self.lambda * self.alpha.powi(step as i32)
    }
}

/// Adds `penalty` to every entry in `indices`, halved for grammar tokens.
/// `grammar` is indexed by token id; ids past its end count as non-grammar.
pub fn discount(
    logp: &LogProbVector,
    indices: &[TokenId],
    penalty: f64,
    grammar: &[bool],
) -> Result<LogProbVector> {
    if penalty > 0.0 {
        return Err(Error::param("penalty", format!("must be <= 0, got {penalty}")));
    }
    if let Some(&bad) = indices.iter().find(|&&i| i as usize >= logp.len()) {
        return Err(Error::param("indices", format!("{bad} out of range")));
    }
    let mut out = logp.clone();
    discount_in_place(&mut out, indices.iter().copied(), penalty, grammar);
    Ok(out)
}

fn discount_in_place(
    logp: &mut LogProbVector,
    indices: impl Iterator<Item = TokenId>,
    penalty: f64,
    grammar: &[bool],
) {
    if penalty == 0.0 {
        return;
    }
    let half = penalty / 2.0;
    for i in indices {
        let g = grammar.get(i as usize).copied().unwrap_or(false);
        logp[i] += if g { half } else { penalty };
    }
}

/// Independent Bernoulli(`b`) draws, one per vocabulary entry.
pub fn sample_bernoulli_mask<R: Rng + ?Sized>(b: f64, size: usize, rng: &mut R) -> Vec<bool> {
    (0..size).map(|_| rng.gen_bool(b)).collect()
}

fn mask_indices(mask: &[bool]) -> impl Iterator<Item = TokenId> + '_ {
    mask.iter()
        .enumerate()
        .filter(|(_, &on)| on)
        .map(|(i, _)| i as TokenId)
}

/// Per-review decoding state.
#[derive(Debug, Clone)]
pub struct PenaltyState {
    review_mask: Vec<bool>,
    grammar: Vec<bool>,
    memory: Vec<bool>,
    step: usize,
    rng: ChaCha8Rng,
}

impl PenaltyState {
    /// Draws the review mask from `rng` and keeps the stream for the
    /// per-step masks.
    pub fn new(vocab_size: usize, b: f64, grammar: Vec<bool>, mut rng: ChaCha8Rng) -> Self {
        let review_mask = sample_bernoulli_mask(b, vocab_size, &mut rng);
        PenaltyState {
            review_mask,
            grammar,
            memory: vec![false; vocab_size],
            step: 0,
            rng,
        }
    }

    pub fn review_mask(&self) -> &[bool] {
        &self.review_mask
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn in_memory(&self, id: TokenId) -> bool {
        self.memory.get(id as usize).copied().unwrap_or(false)
    }

    pub fn memory(&self) -> Vec<TokenId> {
        mask_indices(&self.memory).collect()
    }

    /// Records an emitted token and advances the step counter.
    pub fn record(&mut self, id: TokenId) {
        if let Some(slot) = self.memory.get_mut(id as usize) {
            *slot = true;
        }
        self.step += 1;
    }

    /// Short hex digest of the review mask, for reproducibility sidecars.
    pub fn mask_digest(&self) -> String {
        let bytes: Vec<u8> = self
            .review_mask
            .chunks(8)
            .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b as u8) << i)))
            .collect();
        hex::encode(&Sha256::digest(&bytes)[..8])
    }
}

/// Applies review, start and memory penalties to a fresh model distribution.
///
/// Draws one Bernoulli mask from the state's stream for the start penalty.
/// The state's step is not advanced; call [`PenaltyState::record`] after
/// choosing a token.
pub fn augment(logp: &LogProbVector, params: &GenerationParams, state: &mut PenaltyState) -> LogProbVector {
    let mut out = logp.clone();
    let lambda = params.lambda;
    discount_in_place(&mut out, mask_indices(&state.review_mask), lambda, &state.grammar);
    let start_mask = sample_bernoulli_mask(params.b, state.review_mask.len(), &mut state.rng);
    discount_in_place(
        &mut out,
        mask_indices(&start_mask),
        params.start_penalty(state.step),
        &state.grammar,
    );
    discount_in_place(&mut out, mask_indices(&state.memory), lambda, &state.grammar);
    out
}

/// Blocks EOS before `min_len` tokens and forces it from `max_len` on.
pub fn enforce_length(mut logp: LogProbVector, step: usize, min_len: usize, max_len: usize) -> LogProbVector {
    let eos = logp.eos_id();
    if step >= max_len {
        let v = logp.as_mut_slice();
        let last = v.len() - 1;
        v[..last].fill(f64::NEG_INFINITY);
    } else if step < min_len {
        logp[eos] = f64::NEG_INFINITY;
    }
    logp
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedReview {
    pub tokens: TokenSequence,
    pub ids: Vec<TokenId>,
    pub mask_digest: String,
}

/// Generates one review for `context` with the stream `(params.seed, 0)`.
pub fn generate_review<M: LanguageModel + ?Sized>(
    lm: &M,
    context: &Context,
    params: &GenerationParams,
    grammar: &GrammarSet,
) -> Result<GeneratedReview> {
    params.validate()?;
    let vocab = lm.vocabulary();
    let ctx = vocab.ids(context.tokens().iter());
    Ok(generate_ids(lm, &ctx, params, &grammar.mask(vocab), stream_rng(params.seed, 0)))
}

/// The decoding loop over token ids. `params` must already be validated.
pub fn generate_ids<M: LanguageModel + ?Sized>(
    lm: &M,
    context: &[TokenId],
    params: &GenerationParams,
    grammar_mask: &[bool],
    rng: ChaCha8Rng,
) -> GeneratedReview {
    let vocab = lm.vocabulary();
    let eos = vocab.eos_id();
    let banned = lm.banned_ids();
    let mut state = PenaltyState::new(vocab.len(), params.b, grammar_mask.to_vec(), rng);
    let mut out: Vec<TokenId> = Vec::new();
    loop {
        let base = lm.next_token_logprobs_ids(context, &out);
        let augmented = augment(&base, params, &mut state);
        let bounded = enforce_length(augmented, state.step, params.min_len, params.max_len);
        match bounded.argmax_excluding(&banned) {
            Some(id) if id != eos => {
                out.push(id);
                state.record(id);
            }
            _ => break,
        }
    }
    GeneratedReview {
        tokens: out.iter().map(|&id| vocab.token(id)).collect(),
        ids: out,
        mask_digest: state.mask_digest(),
    }
}

/// Generates one review per context in parallel. Review `i` uses the rng
/// stream `(params.seed, i)`, so output does not depend on thread count.
pub fn generate_batch<M: LanguageModel + ?Sized>(
    lm: &M,
    contexts: &[Context],
    params: &GenerationParams,
    grammar: &GrammarSet,
) -> Result<Vec<GeneratedReview>> {
    params.validate()?;
    let vocab = lm.vocabulary();
    let mask = grammar.mask(vocab);
    Ok(contexts
        .par_iter()
        .enumerate()
        .map(|(i, ctx)| {
            let ids = vocab.ids(ctx.tokens().iter());
            generate_ids(lm, &ids, params, &mask, stream_rng(params.seed, i as u64))
        })
        .collect())
}

/// Sidecar written next to a batch of generated reviews.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchMetadata {
    pub seed: u64,
    pub params: GenerationParams,
    pub reviews: Vec<ReviewMetadata>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewMetadata {
    pub index: usize,
    pub length: usize,
    pub mask_digest: String,
}

impl BatchMetadata {
    pub fn new(params: &GenerationParams, reviews: &[GeneratedReview]) -> Self {
        BatchMetadata {
            seed: params.seed,
            params: *params,
            reviews: reviews
                .iter()
                .enumerate()
                .map(|(index, r)| ReviewMetadata {
                    index,
                    length: r.tokens.len(),
                    mask_digest: r.mask_digest.clone(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests;
