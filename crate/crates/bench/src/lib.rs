//! Shared fixtures for the benchmarks: a small synthetic corpus, a model
//! trained on it and labeled reviews for the detector.

use reviewforge::corpus::{
    build_vocabulary, records_to_pairs, split_corpus, synthetic_records, Context, PreprocessConfig, SynthConfig,
    TokenSequence,
};
use reviewforge::decoder::{generate_batch, GenerationParams, GrammarSet};
use reviewforge::detector::{Label, LabeledReview};
use reviewforge::lm::{NgramConfig, NgramModel};

pub struct Fixture {
    pub lm: NgramModel,
    pub contexts: Vec<Context>,
    pub raw_texts: Vec<String>,
    pub labeled: Vec<LabeledReview>,
}

pub fn fixture(records: usize) -> Fixture {
    let raw = synthetic_records(&SynthConfig {
        records,
        businesses: (records / 100).max(10),
        ..Default::default()
    });
    let cfg = PreprocessConfig {
        min_frequency: 3,
        n_val: 100,
        n_test: 200,
        ..Default::default()
    };
    let (pairs, _) = records_to_pairs(&raw, &cfg).expect("synthetic records are valid");
    let corpus = split_corpus(pairs, cfg.n_val, cfg.n_test, 1).expect("enough pairs");
    let vocab = build_vocabulary(&corpus.train, cfg.min_frequency).expect("non-empty vocabulary");
    let lm = NgramModel::train(&corpus.train, &vocab, NgramConfig::default()).expect("model trains");
    let contexts: Vec<Context> = corpus.test.iter().map(|p| p.context.clone()).collect();
    let generated = generate_batch(&lm, &contexts, &GenerationParams::default(), &GrammarSet::bundled())
        .expect("default params are valid");
    let mut labeled: Vec<LabeledReview> = corpus
        .test
        .iter()
        .map(|p| LabeledReview {
            label: Label::Human,
            review: p.review.clone(),
        })
        .collect();
    labeled.extend(generated.into_iter().map(|g| LabeledReview {
        label: Label::Machine,
        review: g.tokens,
    }));
    Fixture {
        lm,
        contexts,
        raw_texts: raw.iter().take(500).map(|r| r.review_text.clone()).collect(),
        labeled,
    }
}

pub fn reviews(f: &Fixture) -> Vec<TokenSequence> {
    f.labeled.iter().map(|r| r.review.clone()).collect()
}
