use super::*;
use crate::corpus::Vocabulary;
use crate::rng::stream_rng;
use proptest::prelude::*;

fn lp(values: &[f64]) -> LogProbVector {
    LogProbVector::new(values.to_vec())
}

#[test]
fn discount_grammar_and_content() {
    // ids: 0 <unk>, 1 and, 2 burger; EOS 3
    let grammar = vec![false, true, false];
    let base = lp(&[-2.0, -1.0, -1.0, -3.0]);
    let out = discount(&base, &[1, 2], -5.0, &grammar).unwrap();
    assert_eq!(out[1], -3.5);
    assert_eq!(out[2], -6.0);
    assert_eq!(out[0], -2.0);
    assert_eq!(out[3], -3.0);
    assert_eq!(base[1], -1.0, "input untouched");
}

#[test]
fn discount_empty_indices_identity() {
    let base = lp(&[-1.0, -2.0]);
    assert_eq!(discount(&base, &[], -5.0, &[false]).unwrap(), base);
}

#[test]
fn discount_rejects_positive_penalty_and_bad_index() {
    let base = lp(&[-1.0, -2.0]);
    assert!(discount(&base, &[0], 0.5, &[]).is_err());
    assert!(discount(&base, &[2], -1.0, &[]).is_err());
}

#[test]
fn bernoulli_extremes_and_rate() {
    let mut rng = stream_rng(3, 0);
    assert!(sample_bernoulli_mask(0.0, 500, &mut rng).iter().all(|&x| !x));
    assert!(sample_bernoulli_mask(1.0, 500, &mut rng).iter().all(|&x| x));
    let mask = sample_bernoulli_mask(0.3, 10_000, &mut rng);
    let frac = mask.iter().filter(|&&x| x).count() as f64 / 10_000.0;
    // 4 sigma of Binomial(10000, 0.3) / 10000 is 0.0183
    assert!((frac - 0.3).abs() < 0.02, "{frac}");
    let again = sample_bernoulli_mask(0.3, 100, &mut stream_rng(5, 2));
    assert_eq!(again, sample_bernoulli_mask(0.3, 100, &mut stream_rng(5, 2)));
}

#[test]
fn start_penalty_at_step_five() {
    let p = GenerationParams::with_penalty(0.3, -5.0);
    assert!((p.start_penalty(5).abs() - 160.0 / 243.0).abs() < 1e-12);
    assert!((p.start_penalty(5).abs() - 5.0 * 0.131_687_242_798_353_9).abs() < 1e-9);
}

#[test]
fn augment_identity_cases() {
    let base = lp(&[-1.5, -0.7, -2.0, -3.0, -4.0]);
    let grammar = vec![false, true, false, true];
    // b = 0, empty memory
    let params = GenerationParams::with_penalty(0.0, -5.0);
    let mut state = PenaltyState::new(4, 0.0, grammar.clone(), stream_rng(1, 0));
    for _ in 0..4 {
        assert_eq!(augment(&base, &params, &mut state), base);
        state.step += 1;
    }
    // lambda = 0 with masks and memory
    let params = GenerationParams::with_penalty(1.0, 0.0);
    let mut state = PenaltyState::new(4, 1.0, grammar, stream_rng(1, 0));
    state.record(2);
    assert_eq!(augment(&base, &params, &mut state), base);
}

#[test]
fn augment_start_penalty_only() {
    // b = 1 means both masks cover everything; isolate the start part by
    // subtracting the review penalty
    let base = lp(&[-1.0, -1.0, -1.0]);
    let params = GenerationParams::with_penalty(1.0, -5.0);
    let mut state = PenaltyState::new(2, 1.0, vec![false, true], stream_rng(1, 0));
    state.step = 5;
    let out = augment(&base, &params, &mut state);
    let start = 5.0 * (2.0f64 / 3.0).powi(5);
    assert!((out[0] - (-1.0 - 5.0 - start)).abs() < 1e-12);
    assert!((out[1] - (-1.0 - 2.5 - start / 2.0)).abs() < 1e-12);
    assert_eq!(out[2], -1.0, "EOS never masked");
}

#[test]
fn memory_penalty_persists() {
    // replay: "great" (id 1) emitted at step 0; later steps must carry -5 on it
    let vocab_size = 6;
    let base = lp(&[-2.0, -0.5, -1.0, -2.5, -3.0, -2.0, -4.0]);
    let params = GenerationParams::with_penalty(0.3, -5.0);
    let grammar = vec![false; vocab_size];
    let mut state = PenaltyState::new(vocab_size, 0.3, grammar, stream_rng(9, 0));
    state.record(1);
    for _ in 0..10 {
        let out = augment(&base, &params, &mut state);
        assert!(out[1] <= base[1] - 5.0);
        state.record(2);
    }
    assert_eq!(state.memory(), vec![1, 2]);
}

#[test]
fn enforce_length_rules() {
    let base = lp(&[-1.0, -2.0, -0.1]);
    let early = enforce_length(base.clone(), 0, 10, 50);
    assert_eq!(early[2], f64::NEG_INFINITY);
    assert_eq!(early[0], -1.0);
    let late = enforce_length(base.clone(), 50, 10, 50);
    assert_eq!(late.argmax(), Some(2));
    assert_eq!(late[0], f64::NEG_INFINITY);
    assert_eq!(enforce_length(base.clone(), 20, 10, 50), base);
}

#[test]
fn params_validation() {
    assert!(GenerationParams::default().validate().is_ok());
    let bad = [
        GenerationParams { b: 1.5, ..Default::default() },
        GenerationParams { lambda: 1.0, ..Default::default() },
        GenerationParams { alpha: 0.0, ..Default::default() },
        GenerationParams { alpha: 1.1, ..Default::default() },
        GenerationParams { min_len: 60, ..Default::default() },
        GenerationParams { p_typo: -0.1, ..Default::default() },
    ];
    for p in bad {
        assert!(p.validate().is_err(), "{p:?}");
    }
}

/// Four-symbol model whose distribution depends only on the previous token.
struct ToyModel {
    vocab: Vocabulary,
}

impl ToyModel {
    fn new() -> Self {
        ToyModel {
            vocab: Vocabulary::from_tokens(["a", "b", "."]),
        }
    }
}

impl LanguageModel for ToyModel {
    fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    fn next_token_logprobs_ids(&self, _: &[TokenId], prefix: &[TokenId]) -> LogProbVector {
        //          unk    a     b     .     EOS
        let row = match prefix.last() {
            None => [0.01, 0.5, 0.3, 0.09, 0.1],
            Some(1) => [0.01, 0.4, 0.3, 0.2, 0.09],
            Some(2) => [0.01, 0.2, 0.3, 0.3, 0.19],
            _ => [0.01, 0.3, 0.3, 0.09, 0.3],
        };
        LogProbVector::from_probs(&row)
    }
}

fn toy_params(b: f64, lambda: f64, seed: u64) -> GenerationParams {
    GenerationParams {
        b,
        lambda,
        min_len: 2,
        max_len: 5,
        seed,
        ..Default::default()
    }
}

fn toy_generate(b: f64, lambda: f64, seed: u64) -> String {
    let lm = ToyModel::new();
    let grammar = GrammarSet::from_words(Vec::<String>::new(), true);
    generate_review(&lm, &Context::parse("5 x"), &toy_params(b, lambda, seed), &grammar)
        .unwrap()
        .tokens
        .to_text()
}

#[test]
fn toy_trace_no_mask() {
    // b = 0: only memory penalties.
    // step 0: a(.5) wins. step 1: a -5 drops, b(.3) > .(.2), EOS blocked.
    // step 2: a,b penalized; . (.3) > EOS (.19).
    // step 3: . halved to ln .09 - 2.5; EOS ln .3 wins.
    assert_eq!(toy_generate(0.0, -5.0, 1), "a b .");
    assert_eq!(toy_generate(0.0, -5.0, 99), "a b .");
}

#[test]
fn toy_trace_full_mask() {
    // b = 1, λ = -1: every token carries review -1 and start -(2/3)^i, halved for "."
    // step 0: a = ln.5 - 2 = -2.693, b = -3.204, . = ln.09 - 1 = -3.408 -> a
    // step 1: a = ln.4 - 1 - .667 - 1 = -3.583, b = ln.3 - 1.667 = -2.871,
    //         . = ln.2 - .5 - .333 = -2.443 -> .
    // step 2: EOS ln .3 = -1.204 beats every penalized token
    assert_eq!(toy_generate(1.0, -1.0, 4), "a .");
}

#[test]
fn toy_trace_length_cap() {
    // no penalties: "a" follows "a" forever until max_len forces EOS
    assert_eq!(toy_generate(0.0, 0.0, 0), "a a a a a");
}

/// Independent replay of the decoding loop using the documented rng protocol:
/// review mask first, then one mask per step, each one draw per vocab token.
fn replay(b: f64, lambda: f64, seed: u64) -> String {
    let lm = ToyModel::new();
    let names = ["<unk>", "a", "b", "."];
    let grammar = [false, false, false, true];
    let mut rng = stream_rng(seed, 0);
    let review: Vec<bool> = (0..4).map(|_| rand::Rng::gen_bool(&mut rng, b)).collect();
    let mut out: Vec<TokenId> = vec![];
    loop {
        let i = out.len();
        let start: Vec<bool> = (0..4).map(|_| rand::Rng::gen_bool(&mut rng, b)).collect();
        let base = lm.next_token_logprobs_ids(&[], &out);
        let mut best: Option<(usize, f64)> = None;
        for t in 0..5usize {
            let mut s = base.as_slice()[t];
            if t < 4 {
                let scale = if grammar[t] { 0.5 } else { 1.0 };
                if review[t] {
                    s += scale * lambda;
                }
                if start[t] {
                    s += scale * lambda * (2.0f64 / 3.0).powi(i as i32);
                }
                if out.contains(&(t as TokenId)) {
                    s += scale * lambda;
                }
            }
            if t == 4 && i < 2 {
                s = f64::NEG_INFINITY;
            }
            if i >= 5 && t != 4 {
                s = f64::NEG_INFINITY;
            }
            if t == 0 {
                continue;
            }
            if best.map_or(true, |(_, v)| s > v) {
                best = Some((t, s));
            }
        }
        let (t, _) = best.unwrap();
        if t == 4 {
            break;
        }
        out.push(t as TokenId);
    }
    out.iter().map(|&t| names[t as usize]).collect::<Vec<_>>().join(" ")
}

#[test]
fn toy_matches_replay_oracle() {
    for (b, lambda, seed) in [(0.0, -5.0, 1), (1.0, -1.0, 4), (0.5, -3.0, 11), (0.3, -5.0, 7), (0.7, -2.0, 3)] {
        assert_eq!(toy_generate(b, lambda, seed), replay(b, lambda, seed), "b={b} λ={lambda} seed={seed}");
    }
}

#[test]
fn seeded_determinism_and_mask_variation() {
    let lm = ToyModel::new();
    let grammar = GrammarSet::bundled();
    let ctx = Context::parse("1 q");
    let p = toy_params(0.5, -3.0, 42);
    let a = generate_review(&lm, &ctx, &p, &grammar).unwrap();
    let b = generate_review(&lm, &ctx, &p, &grammar).unwrap();
    assert_eq!(a, b);
    let digests: std::collections::HashSet<_> = (0..20)
        .map(|s| generate_review(&lm, &ctx, &toy_params(0.5, -3.0, s), &grammar).unwrap().mask_digest)
        .collect();
    assert!(digests.len() > 1);
}

#[test]
fn batch_uses_independent_streams() {
    let lm = ToyModel::new();
    let grammar = GrammarSet::bundled();
    let ctxs: Vec<_> = (0..8).map(|i| Context::parse(&format!("3 c{i}"))).collect();
    let p = toy_params(0.5, -3.0, 5);
    let batch = generate_batch(&lm, &ctxs, &p, &grammar).unwrap();
    let again = generate_batch(&lm, &ctxs, &p, &grammar).unwrap();
    assert_eq!(batch, again);
    let vocab = lm.vocabulary();
    let first = generate_ids(&lm, &[], &p, &grammar.mask(vocab), stream_rng(5, 0));
    assert_eq!(batch[0], first);
    let meta = BatchMetadata::new(&p, &batch);
    assert_eq!(meta.reviews.len(), 8);
    assert_eq!(meta.seed, 5);
}

proptest! {
    #[test]
    fn augment_never_increases(
        base in prop::collection::vec(-20.0f64..0.0, 2..40),
        b in 0.0f64..=1.0,
        lambda in -10.0f64..=0.0,
        alpha in 0.01f64..=1.0,
        step in 0usize..60,
        seed in any::<u64>(),
        mem in prop::collection::vec(any::<prop::sample::Index>(), 0..5),
    ) {
        let n = base.len() - 1;
        let grammar: Vec<bool> = (0..n).map(|i| i % 3 == 0).collect();
        let params = GenerationParams { b, lambda, alpha, ..Default::default() };
        let mut state = PenaltyState::new(n, b, grammar, stream_rng(seed, 0));
        for m in &mem {
            state.record(m.index(n) as TokenId);
        }
        state.step = step;
        let base = LogProbVector::new(base);
        let out = augment(&base, &params, &mut state);
        for (o, i) in out.as_slice().iter().zip(base.as_slice()) {
            prop_assert!(o <= i);
        }
        prop_assert_eq!(out.as_slice()[n], base.as_slice()[n]);
    }

    #[test]
    fn output_length_within_bounds(b in 0.0f64..=1.0, lambda in -8.0f64..=0.0, seed in any::<u64>(), min_len in 0usize..4, extra in 0usize..5) {
        let lm = ToyModel::new();
        let p = GenerationParams { b, lambda, min_len, max_len: min_len + extra, seed, ..Default::default() };
        let out = generate_review(&lm, &Context::parse("2 z"), &p, &GrammarSet::bundled()).unwrap();
        prop_assert!(out.tokens.len() >= min_len && out.tokens.len() <= min_len + extra);
        prop_assert!(out.ids.iter().all(|&i| i != 0));
    }
}
