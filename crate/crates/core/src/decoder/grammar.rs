use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::corpus::{is_punctuation, Vocabulary};
use crate::error::{Error, Result};

const DEFAULT_LIST: &str = include_str!("../../data/grammar_words.txt");

/// Pronouns, conjunctions and punctuation that take half penalties.
///
/// Word-list format: one token per line, `#` starts a comment, and the
/// directive `@punctuation` admits every single-character punctuation token.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GrammarSet {
    words: BTreeSet<String>,
    punctuation: bool,
}

impl GrammarSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The bundled list.
    pub fn bundled() -> Self {
        Self::parse(DEFAULT_LIST)
    }

    pub fn parse(text: &str) -> Self {
        let mut set = GrammarSet::default();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line == "@punctuation" {
                set.punctuation = true;
            } else {
                set.words.insert(line.to_ascii_lowercase());
            }
        }
        set
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn from_words<I, S>(words: I, punctuation: bool) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        GrammarSet {
            words: words.into_iter().map(Into::into).collect(),
            punctuation,
        }
    }

    /// Exact-token membership.
    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token) || (self.punctuation && is_punctuation(token))
    }

    pub fn len_words(&self) -> usize {
        self.words.len()
    }

    /// Membership flag per vocabulary id.
    pub fn mask(&self, vocab: &Vocabulary) -> Vec<bool> {
        vocab.tokens().iter().map(|t| self.contains(t)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_covers_examples() {
        let g = GrammarSet::bundled();
        for t in ["i", "them", "our", "and", "thus", "if", ",", ".", "!", "'"] {
            assert!(g.contains(t), "{t}");
        }
        assert!(!g.contains("burger"));
        assert!(!g.contains("And"), "membership is exact after normalization");
        assert!(g.len_words() >= 55);
    }

    #[test]
    fn parse_directive_and_comments() {
        let g = GrammarSet::parse("# c\nfoo\n\n");
        assert!(g.contains("foo"));
        assert!(!g.contains("."));
        let g = GrammarSet::parse("@punctuation\n");
        assert!(g.contains("?"));
    }
}
