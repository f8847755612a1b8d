//! Review ingestion: cleaning, context rendering, splitting and vocabulary.

mod record;
pub mod synth;
mod text;
mod vocab;

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use synth::{synthetic_records, write_synthetic_jsonl, SynthConfig};
pub use record::{build_context, build_context_with, read_jsonl, Context, FieldMapping, RawRecord};
pub use text::{clean_text, clean_text_with, is_punctuation, is_word, CleanOptions, TokenSequence};
pub use vocab::{build_vocabulary, TokenId, Vocabulary, EOS, UNK, UNK_ID};

use crate::error::{Error, Result};

/// One (context, review) training example.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelPair {
    pub context: Context,
    pub review: TokenSequence,
}

/// Train/validation/test partition of parallel pairs.
#[derive(Debug, Clone, Default)]
pub struct ParallelCorpus {
    pub train: Vec<ParallelPair>,
    pub val: Vec<ParallelPair>,
    pub test: Vec<ParallelPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub lowercase: bool,
    pub min_frequency: u64,
    /// Reviews longer than this many tokens are dropped.
    pub max_review_tokens: usize,
    /// Records need at least one of these tags; empty keeps all.
    pub keep_tags: Vec<String>,
    pub n_val: usize,
    pub n_test: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            lowercase: true,
            min_frequency: 10,
            max_review_tokens: 50,
            keep_tags: vec!["Restaurants".into()],
            n_val: 15_000,
            n_test: 3_000,
        }
    }
}

/// Counters describing what [`records_to_pairs`] dropped.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub records: usize,
    pub filtered_tags: usize,
    pub empty_review: usize,
    pub too_long: usize,
    pub kept: usize,
}

/// Turns raw records into parallel pairs, dropping records outside the tag
/// keep-list, with empty cleaned text, or over the length limit.
pub fn records_to_pairs(
    records: &[RawRecord],
    cfg: &PreprocessConfig,
) -> Result<(Vec<ParallelPair>, IngestStats)> {
    let opts = CleanOptions {
        lowercase: cfg.lowercase,
    };
    let converted: Vec<Result<Option<ParallelPair>, (usize, Error)>> = records
        .par_iter()
        .map(|r| {
            if !r.has_any_tag(&cfg.keep_tags) {
                return Ok(None);
            }
            let review = TokenSequence::from_cleaned(&clean_text_with(&r.review_text, opts));
            if review.is_empty() || review.len() > cfg.max_review_tokens {
                return Ok(None);
            }
            let context = build_context_with(r, opts).map_err(|e| (0, e))?;
            Ok(Some(ParallelPair { context, review }))
        })
        .collect();

    let mut stats = IngestStats {
        records: records.len(),
        ..Default::default()
    };
    let mut pairs = Vec::with_capacity(records.len());
    for (r, c) in records.iter().zip(converted) {
        match c {
            Ok(Some(p)) => pairs.push(p),
            Ok(None) => {
                if !r.has_any_tag(&cfg.keep_tags) {
                    stats.filtered_tags += 1;
                } else if clean_text_with(&r.review_text, opts).is_empty() {
                    stats.empty_review += 1;
                } else {
                    stats.too_long += 1;
                }
            }
            Err((_, e)) => return Err(e),
        }
    }
    stats.kept = pairs.len();
    Ok((pairs, stats))
}

/// Shuffles with a seeded ChaCha stream and carves off validation and test.
pub fn split_corpus(
    pairs: Vec<ParallelPair>,
    n_val: usize,
    n_test: usize,
    seed: u64,
) -> Result<ParallelCorpus> {
    let requested = n_val + n_test;
    if requested >= pairs.len() {
        return Err(Error::InsufficientPairs {
            available: pairs.len(),
            requested,
        });
    }
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut slots: Vec<Option<ParallelPair>> = pairs.into_iter().map(Some).collect();
    let mut take = |idx: &[usize]| -> Vec<ParallelPair> {
        idx.iter().map(|&i| slots[i].take().expect("index used once")).collect()
    };
    let val = take(&order[..n_val]);
    let test = take(&order[n_val..requested]);
    let train = take(&order[requested..]);
    Ok(ParallelCorpus { train, val, test })
}

impl ParallelCorpus {
    /// Writes `context-{split}.txt` / `reviews-{split}.txt` pairs under `dir`.
    pub fn write_aligned(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, split) in [("train", &self.train), ("val", &self.val), ("test", &self.test)] {
            write_aligned(
                &dir.join(format!("context-{name}.txt")),
                &dir.join(format!("reviews-{name}.txt")),
                split,
            )?;
        }
        Ok(())
    }

    pub fn read_aligned(dir: &Path) -> Result<Self> {
        let read = |name: &str| {
            read_aligned(
                &dir.join(format!("context-{name}.txt")),
                &dir.join(format!("reviews-{name}.txt")),
            )
        };
        Ok(ParallelCorpus {
            train: read("train")?,
            val: read("val")?,
            test: read("test")?,
        })
    }
}

/// Writes two line-aligned files, LF-terminated.
pub fn write_aligned(contexts: &Path, reviews: &Path, pairs: &[ParallelPair]) -> Result<()> {
    let mut c = Vec::new();
    let mut r = Vec::new();
    for p in pairs {
        writeln!(c, "{}", p.context).expect("write to vec");
        writeln!(r, "{}", p.review).expect("write to vec");
    }
    fs::write(contexts, c).map_err(|e| Error::io(contexts, e))?;
    fs::write(reviews, r).map_err(|e| Error::io(reviews, e))
}

pub fn read_aligned(contexts: &Path, reviews: &Path) -> Result<Vec<ParallelPair>> {
    let c = fs::read_to_string(contexts).map_err(|e| Error::io(contexts, e))?;
    let r = fs::read_to_string(reviews).map_err(|e| Error::io(reviews, e))?;
    let (cl, rl): (Vec<_>, Vec<_>) = (c.lines().collect(), r.lines().collect());
    if cl.len() != rl.len() {
        return Err(Error::Parse {
            line: cl.len().min(rl.len()) + 1,
            message: format!(
                "aligned files differ in length ({} contexts, {} reviews)",
                cl.len(),
                rl.len()
            ),
        });
    }
    Ok(cl
        .into_iter()
        .zip(rl)
        .map(|(c, r)| ParallelPair {
            context: Context::parse(c),
            review: TokenSequence::from_cleaned(r),
        })
        .collect())
}

/// Reads one context per line, skipping blank lines.
pub fn read_contexts(path: &Path) -> Result<Vec<Context>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(Context::parse)
        .collect())
}
