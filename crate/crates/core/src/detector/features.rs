//! Sparse count features over fitted n-gram vocabularies.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::pos::{pos_tag, PosTag};
use super::readability::{scores_from_counts, TextCounts, READABILITY_NAMES};
use super::Label;
use crate::corpus::TokenSequence;
use crate::error::{Error, Result};

/// Which feature groups to build and how aggressively to prune them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub readability: bool,
    pub pos_unigrams: bool,
    /// Largest POS n-gram order; 0 disables the group.
    pub pos_ngram_max: usize,
    pub word_unigrams: bool,
    /// Largest character n-gram order; 0 disables the group.
    pub char_ngram_max: usize,
    /// Fitted n-grams must occur in at least this many training documents.
    pub min_doc_freq: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self::stylometric()
    }
}

impl FeatureConfig {
    /// Readability, POS tags and n-grams, and word unigrams.
    pub fn stylometric() -> Self {
        FeatureConfig {
            readability: true,
            pos_unigrams: true,
            pos_ngram_max: 4,
            word_unigrams: true,
            char_ngram_max: 0,
            min_doc_freq: 2,
        }
    }

    /// Character n-grams up to length 3 only.
    pub fn char_ngrams() -> Self {
        FeatureConfig {
            readability: false,
            pos_unigrams: false,
            pos_ngram_max: 0,
            word_unigrams: false,
            char_ngram_max: 3,
            min_doc_freq: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureGroup {
    Readability,
    PosUnigram,
    PosNgram,
    WordUnigram,
    CharNgram,
}

impl FeatureGroup {
    fn prefix(self) -> &'static str {
        match self {
            FeatureGroup::Readability => "read",
            FeatureGroup::PosUnigram => "pos",
            FeatureGroup::PosNgram => "posng",
            FeatureGroup::WordUnigram => "word",
            FeatureGroup::CharNgram => "char",
        }
    }
}

/// Named feature columns with contiguous ranges per group.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureSpace {
    config: FeatureConfig,
    names: Vec<String>,
    groups: Vec<(FeatureGroup, u32, u32)>,
    hash: u64,
    #[serde(skip)]
    index: HashMap<String, u32>,
}

/// Sparse features of one document, sorted by index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub space_hash: u64,
    pub entries: Vec<(u32, f64)>,
    pub label: Option<Label>,
}

impl FeatureVector {
    pub fn get(&self, index: u32) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map(|k| self.entries[k].1)
            .unwrap_or(0.0)
    }
}

/// The raw (unfitted) keys of each n-gram group for one document.
struct DocGrams {
    pos: Vec<PosTag>,
    pos_ngrams: BTreeMap<String, f64>,
    words: BTreeMap<String, f64>,
    chars: BTreeMap<String, f64>,
}

fn doc_grams(review: &TokenSequence, cfg: &FeatureConfig) -> DocGrams {
    let pos = if cfg.pos_unigrams || cfg.pos_ngram_max > 0 {
        pos_tag(review.tokens())
    } else {
        Vec::new()
    };
    let mut pos_ngrams = BTreeMap::new();
    for n in 1..=cfg.pos_ngram_max {
        for w in pos.windows(n) {
            let key = w.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(" ");
            *pos_ngrams.entry(key).or_insert(0.0) += 1.0;
        }
    }
    let mut words = BTreeMap::new();
    if cfg.word_unigrams {
        for t in review.iter() {
            *words.entry(t.to_owned()).or_insert(0.0) += 1.0;
        }
    }
    let mut chars = BTreeMap::new();
    if cfg.char_ngram_max > 0 {
        let text = review.to_text();
        let bytes = text.as_bytes();
        for n in 1..=cfg.char_ngram_max {
            for w in bytes.windows(n) {
                let key = String::from_utf8_lossy(w).into_owned();
                *chars.entry(key).or_insert(0.0) += 1.0;
            }
        }
    }
    DocGrams {
        pos,
        pos_ngrams,
        words,
        chars,
    }
}

impl FeatureSpace {
    /// Fits n-gram vocabularies on training documents only.
    pub fn fit(train: &[TokenSequence], config: FeatureConfig) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::Empty("feature training documents"));
        }
        let mut names = Vec::new();
        let mut groups = Vec::new();
        let mut push_group = |group: FeatureGroup, keys: Vec<String>, names: &mut Vec<String>| {
            let start = names.len() as u32;
            names.extend(keys.into_iter().map(|k| format!("{}:{}", group.prefix(), k)));
            groups.push((group, start, names.len() as u32));
        };
        if config.readability {
            push_group(
                FeatureGroup::Readability,
                READABILITY_NAMES.iter().map(|s| s.to_string()).collect(),
                &mut names,
            );
        }
        if config.pos_unigrams {
            push_group(
                FeatureGroup::PosUnigram,
                PosTag::ALL.iter().map(|t| t.as_str().to_owned()).collect(),
                &mut names,
            );
        }
        let mut df_pos: BTreeMap<String, usize> = BTreeMap::new();
        let mut df_word: BTreeMap<String, usize> = BTreeMap::new();
        let mut df_char: BTreeMap<String, usize> = BTreeMap::new();
        for doc in train {
            let g = doc_grams(doc, &config);
            for k in g.pos_ngrams.into_keys() {
                *df_pos.entry(k).or_default() += 1;
            }
            for k in g.words.into_keys() {
                *df_word.entry(k).or_default() += 1;
            }
            for k in g.chars.into_keys() {
                *df_char.entry(k).or_default() += 1;
            }
        }
        let keep = |df: BTreeMap<String, usize>| -> Vec<String> {
            df.into_iter()
                .filter(|&(_, c)| c >= config.min_doc_freq.max(1))
                .map(|(k, _)| k)
                .collect()
        };
        if config.pos_ngram_max > 0 {
            push_group(FeatureGroup::PosNgram, keep(df_pos), &mut names);
        }
        if config.word_unigrams {
            push_group(FeatureGroup::WordUnigram, keep(df_word), &mut names);
        }
        if config.char_ngram_max > 0 {
            push_group(FeatureGroup::CharNgram, keep(df_char), &mut names);
        }
        let mut space = FeatureSpace {
            config,
            names,
            groups,
            hash: 0,
            index: HashMap::new(),
        };
        space.hash = space.compute_hash();
        space.rebuild_index();
        Ok(space)
    }

    fn compute_hash(&self) -> u64 {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&self.config).expect("config serializes"));
        for n in &self.names {
            h.update(n.as_bytes());
            h.update([0]);
        }
        u64::from_le_bytes(h.finalize()[..8].try_into().unwrap())
    }

    pub(crate) fn rebuild_index(&mut self) {
        self.index = self
            .names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as u32))
            .collect();
    }

    pub(crate) fn verify_hash(&self) -> Result<()> {
        let h = self.compute_hash();
        if h != self.hash {
            return Err(Error::FeatureSpaceMismatch {
                expected: self.hash,
                found: h,
            });
        }
        Ok(())
    }

    pub fn hash(&self) -> u64 {
        self.hash
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, index: u32) -> &str {
        &self.names[index as usize]
    }

    pub fn index_of(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    /// Number of columns per group.
    pub fn group_sizes(&self) -> Vec<(FeatureGroup, usize)> {
        self.groups
            .iter()
            .map(|&(g, s, e)| (g, (e - s) as usize))
            .collect()
    }

    fn group_start(&self, group: FeatureGroup) -> Option<u32> {
        self.groups.iter().find(|g| g.0 == group).map(|g| g.1)
    }

    /// Counts for every enabled group. n-grams outside the fitted space are
    /// ignored.
    pub fn extract(&self, review: &TokenSequence, label: Option<Label>) -> FeatureVector {
        let cfg = &self.config;
        let mut entries: Vec<(u32, f64)> = Vec::new();
        if let Some(start) = self.group_start(FeatureGroup::Readability) {
            if !review.is_empty() {
                let scores = scores_from_counts(&TextCounts::of(review));
                for (i, v) in scores.into_iter().enumerate() {
                    if v != 0.0 {
                        entries.push((start + i as u32, v));
                    }
                }
            }
        }
        let g = doc_grams(review, cfg);
        if let Some(start) = self.group_start(FeatureGroup::PosUnigram) {
            let mut counts = [0.0; 17];
            for t in &g.pos {
                counts[t.index()] += 1.0;
            }
            for (i, c) in counts.into_iter().enumerate() {
                if c != 0.0 {
                    entries.push((start + i as u32, c));
                }
            }
        }
        let mut fitted = |group: FeatureGroup, grams: BTreeMap<String, f64>| {
            for (k, v) in grams {
                let name = format!("{}:{}", group.prefix(), k);
                if let Some(&i) = self.index.get(&name) {
                    entries.push((i, v));
                }
            }
        };
        fitted(FeatureGroup::PosNgram, g.pos_ngrams);
        fitted(FeatureGroup::WordUnigram, g.words);
        fitted(FeatureGroup::CharNgram, g.chars);
        entries.sort_unstable_by_key(|&(i, _)| i);
        FeatureVector {
            space_hash: self.hash,
            entries,
            label,
        }
    }
}

pub fn extract_features(review: &TokenSequence, space: &FeatureSpace) -> FeatureVector {
    space.extract(review, None)
}

/// Names of features present in any of `vectors`, for diagnostics.
pub fn active_features<'a>(space: &'a FeatureSpace, vectors: &[FeatureVector]) -> Vec<&'a str> {
    let active: HashSet<u32> = vectors.iter().flat_map(|v| v.entries.iter().map(|e| e.0)).collect();
    let mut idx: Vec<_> = active.into_iter().collect();
    idx.sort_unstable();
    idx.into_iter().map(|i| space.name(i)).collect()
}
