use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ParallelPair;
use crate::error::{Error, Result};

pub type TokenId = u32;

pub const UNK: &str = "<unk>";
pub const EOS: &str = "</s>";
pub const UNK_ID: TokenId = 0;

/// Dense token/index bijection shared by contexts and reviews.
///
/// Index 0 is always [`UNK`]. End-of-sequence is not stored: it owns the
/// index one past the last token, see [`Vocabulary::eos_id`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    #[serde(skip)]
    index: HashMap<String, TokenId>,
}

impl Vocabulary {
    /// Builds a vocabulary from an explicit token list, all with count 0.
    /// [`UNK`] is inserted at index 0; duplicates are ignored.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut list = vec![UNK.to_owned()];
        for t in tokens {
            let t = t.as_ref();
            if t != UNK && !list.iter().any(|x| x == t) {
                list.push(t.to_owned());
            }
        }
        let counts = vec![0; list.len()];
        Self::from_parts(list, counts)
    }

    fn from_parts(tokens: Vec<String>, counts: Vec<u64>) -> Self {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TokenId))
            .collect();
        Vocabulary {
            tokens,
            counts,
            index,
        }
    }

    pub(crate) fn rebuild_index(&mut self) {
        self.index = self
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TokenId))
            .collect();
    }

    /// Number of tokens including [`UNK`], excluding EOS.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn eos_id(&self) -> TokenId {
        self.tokens.len() as TokenId
    }

    /// Size of a next-token distribution: every token plus EOS.
    pub fn output_size(&self) -> usize {
        self.tokens.len() + 1
    }

    pub fn get(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Maps a token to its id, falling back to [`UNK_ID`].
    pub fn id(&self, token: &str) -> TokenId {
        self.get(token).unwrap_or(UNK_ID)
    }

    pub fn ids<'a>(&self, tokens: impl IntoIterator<Item = &'a str>) -> Vec<TokenId> {
        tokens.into_iter().map(|t| self.id(t)).collect()
    }

    /// Token text for an id; EOS maps to [`EOS`].
    pub fn token(&self, id: TokenId) -> &str {
        if id == self.eos_id() {
            EOS
        } else {
            &self.tokens[id as usize]
        }
    }

    pub fn count(&self, id: TokenId) -> u64 {
        self.counts.get(id as usize).copied().unwrap_or(0)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// `token<TAB>count` lines in index order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (t, c) in self.tokens.iter().zip(&self.counts) {
            out.push_str(t);
            out.push('\t');
            out.push_str(&c.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut tokens = Vec::new();
        let mut counts = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let (tok, count) = line.split_once('\t').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: "expected token<TAB>count".into(),
            })?;
            let count = count.trim().parse::<u64>().map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            tokens.push(tok.to_owned());
            counts.push(count);
        }
        if tokens.first().map(String::as_str) != Some(UNK) {
            return Err(Error::Parse {
                line: 1,
                message: format!("first vocabulary entry must be {UNK}"),
            });
        }
        let vocab = Self::from_parts(tokens, counts);
        if vocab.index.len() != vocab.tokens.len() {
            return Err(Error::Parse {
                line: 0,
                message: "duplicate vocabulary token".into(),
            });
        }
        Ok(vocab)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_tsv(&text)
    }

    /// SHA-256 of the TSV serialization, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_tsv().as_bytes()))
    }
}

/// Counts every context and review token of `train` and keeps those seen at
/// least `min_frequency` times. Ties in frequency are ordered by token text
/// so index assignment is deterministic.
pub fn build_vocabulary(train: &[ParallelPair], min_frequency: u64) -> Result<Vocabulary> {
    if train.is_empty() {
        return Err(Error::Empty("training pairs"));
    }
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for pair in train {
        for tok in pair.context.tokens().iter().chain(pair.review.iter()) {
            *freq.entry(tok).or_default() += 1;
        }
    }
    let min_frequency = min_frequency.max(1);
    let mut kept: Vec<(&str, u64)> = Vec::new();
    let mut unk_count = 0;
    for (tok, c) in freq {
        if c >= min_frequency && tok != UNK {
            kept.push((tok, c));
        } else {
            unk_count += c;
        }
    }
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let mut tokens = Vec::with_capacity(kept.len() + 1);
    let mut counts = Vec::with_capacity(kept.len() + 1);
    tokens.push(UNK.to_owned());
    counts.push(unk_count);
    for (t, c) in kept {
        tokens.push(t.to_owned());
        counts.push(c);
    }
    Ok(Vocabulary::from_parts(tokens, counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Context, TokenSequence};
    use std::collections::BTreeMap;

    fn pair(ctx: &str, review: &str) -> ParallelPair {
        ParallelPair {
            context: Context::parse(ctx),
            review: TokenSequence::from_cleaned(review),
        }
    }

    #[test]
    fn rare_token_maps_to_unk() {
        let mut pairs = vec![];
        for _ in 0..10 {
            pairs.push(pair("5 x", "good food"));
        }
        for _ in 0..3 {
            pairs.push(pair("5 x", "aardvark"));
        }
        let v = build_vocabulary(&pairs, 10).unwrap();
        assert!(!v.contains("aardvark"));
        assert_eq!(v.id("aardvark"), UNK_ID);
        assert_eq!(v.count(UNK_ID), 3);
        assert!(v.contains("good"));
    }

    #[test]
    fn min_frequency_one_keeps_all() {
        let pairs = vec![pair("1 a", "b c d"), pair("2 a", "e")];
        let v = build_vocabulary(&pairs, 1).unwrap();
        for t in ["1", "2", "a", "b", "c", "d", "e"] {
            assert!(v.contains(t), "{t}");
        }
        assert_eq!(v.len(), 8);
        assert_eq!(v.eos_id(), 8);
        assert_eq!(v.output_size(), 9);
    }

    #[test]
    fn empty_train_rejected() {
        assert!(matches!(build_vocabulary(&[], 1), Err(Error::Empty(_))));
    }

    #[test]
    fn matches_brute_force_count() {
        let sentences = [
            "the food was great .",
            "great food , great service .",
            "the service was slow .",
            "i love the tacos !",
            "tacos were cold .",
            "we will be back .",
            "the staff was friendly .",
            "the food was cold .",
            "great place !",
            "i love this place .",
            "the tacos were great .",
            "slow service , cold food .",
            "we love the staff .",
            "the place was busy .",
            "great tacos !",
            "the staff was slow .",
            "i will be back !",
            "food was great .",
            "love the food .",
            "the best tacos .",
        ];
        let pairs: Vec<_> = sentences.iter().map(|s| pair("5 taco shop", s)).collect();
        let v = build_vocabulary(&pairs, 3).unwrap();

        // independent count
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for s in sentences {
            for t in "5 taco shop".split(' ').chain(s.split(' ')) {
                *counts.entry(t.to_owned()).or_default() += 1;
            }
        }
        let expected: Vec<_> = counts.iter().filter(|(_, c)| **c >= 3).collect();
        assert_eq!(v.len(), expected.len() + 1);
        for (tok, c) in &expected {
            let id = v.get(tok).unwrap();
            assert_eq!(v.count(id), **c);
        }
        let unk: u64 = counts.values().filter(|c| **c < 3).sum();
        assert_eq!(v.count(UNK_ID), unk);
        // every training token is known or unk
        for p in &pairs {
            for t in p.review.iter() {
                assert!(v.contains(t) || v.id(t) == UNK_ID);
            }
        }
    }

    #[test]
    fn tsv_round_trip_and_hash() {
        let pairs = vec![pair("1 a", "b b c")];
        let v = build_vocabulary(&pairs, 1).unwrap();
        let back = Vocabulary::from_tsv(&v.to_tsv()).unwrap();
        assert_eq!(back.tokens(), v.tokens());
        assert_eq!(back.hash(), v.hash());
        assert_eq!(back.id("b"), v.id("b"));
        assert_eq!(v.tokens()[1], "b");
    }

    #[test]
    fn tsv_requires_unk_first() {
        assert!(Vocabulary::from_tsv("a\t1\n").is_err());
        assert!(Vocabulary::from_tsv("<unk>\t0\na\tx\n").is_err());
    }
}
