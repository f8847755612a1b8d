//! Thirteen readability statistics computed over a cleaned token sequence.

use crate::corpus::TokenSequence;
use crate::error::{Error, Result};

pub const READABILITY_NAMES: [&str; 13] = [
    "automated_readability_index",
    "flesch_reading_ease",
    "flesch_kincaid_grade",
    "gunning_fog",
    "smog",
    "coleman_liau",
    "lix",
    "rix",
    "dale_chall_approx",
    "avg_sentence_length",
    "avg_word_length",
    "avg_syllables_per_word",
    "type_token_ratio",
];

/// Indices into [`READABILITY_NAMES`] that depend only on ratios of counts
/// and so survive duplicating a text.
pub const RATIO_METRICS: std::ops::Range<usize> = 0..12;

fn is_terminal(tok: &str) -> bool {
    matches!(tok, "." | "!" | "?")
}

fn is_text_word(tok: &str) -> bool {
    tok.bytes().any(|b| b.is_ascii_alphanumeric())
}

/// Vowel-group syllable estimate with a silent-e correction; never below 1.
pub fn count_syllables(word: &str) -> usize {
    let w: Vec<u8> = word.bytes().map(|b| b.to_ascii_lowercase()).collect();
    if !w.iter().any(u8::is_ascii_alphabetic) {
        return 1;
    }
    let vowel = |b: u8| matches!(b, b'a' | b'e' | b'i' | b'o' | b'u' | b'y');
    let mut groups = 0;
    let mut prev = false;
    for &b in &w {
        let v = vowel(b);
        if v && !prev {
            groups += 1;
        }
        prev = v;
    }
    let n = w.len();
    if n > 2 && w[n - 1] == b'e' && w[n - 2] != b'l' && !vowel(w[n - 2]) && groups > 1 {
        groups -= 1;
    }
    groups.max(1)
}

/// Raw counts the formulas are built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TextCounts {
    pub words: usize,
    pub sentences: usize,
    pub characters: usize,
    pub syllables: usize,
    pub polysyllables: usize,
    pub long_words: usize,
    pub types: usize,
}

impl TextCounts {
    /// Sentences end at runs of `.`, `!` or `?`; trailing words without a
    /// terminator form one more sentence. At least one sentence is counted.
    pub fn of(review: &TokenSequence) -> Self {
        let mut c = TextCounts::default();
        let mut open = false;
        let mut prev_terminal = false;
        let mut types = std::collections::HashSet::new();
        for tok in review.iter() {
            if is_terminal(tok) {
                if !prev_terminal {
                    c.sentences += 1;
                }
                prev_terminal = true;
                open = false;
                continue;
            }
            prev_terminal = false;
            if is_text_word(tok) {
                open = true;
                c.words += 1;
                let chars = tok.bytes().filter(u8::is_ascii_alphanumeric).count();
                c.characters += chars;
                let syl = count_syllables(tok);
                c.syllables += syl;
                if syl >= 3 {
                    c.polysyllables += 1;
                }
                if chars > 6 {
                    c.long_words += 1;
                }
                types.insert(tok.to_ascii_lowercase());
            }
        }
        if open {
            c.sentences += 1;
        }
        c.sentences = c.sentences.max(1);
        c.types = types.len();
        c
    }
}

/// The 13 scores, in [`READABILITY_NAMES`] order.
pub fn readability_scores(review: &TokenSequence) -> Result<[f64; 13]> {
    if review.is_empty() {
        return Err(Error::Empty("review"));
    }
    Ok(scores_from_counts(&TextCounts::of(review)))
}

pub fn scores_from_counts(c: &TextCounts) -> [f64; 13] {
    let w = c.words.max(1) as f64;
    let s = c.sentences.max(1) as f64;
    let chars = c.characters as f64;
    let syl = c.syllables as f64;
    let poly = c.polysyllables as f64;
    let long = c.long_words as f64;

    let wps = w / s;
    let cpw = chars / w;
    let spw = syl / w;
    let poly_pct = 100.0 * poly / w;

    let ari = 4.71 * cpw + 0.5 * wps - 21.43;
    let flesch = 206.835 - 1.015 * wps - 84.6 * spw;
    let fk = 0.39 * wps + 11.8 * spw - 15.59;
    let fog = 0.4 * (wps + poly_pct);
    let smog = 1.0430 * (poly * 30.0 / s).sqrt() + 3.1291;
    let coleman = 0.0588 * (100.0 * cpw) - 0.296 * (100.0 * s / w) - 15.8;
    let lix = wps + 100.0 * long / w;
    let rix = long / s;
    // polysyllabic words stand in for the Dale-Chall difficult-word list
    let mut dale = 0.1579 * poly_pct + 0.0496 * wps;
    if poly_pct > 5.0 {
        dale += 3.6365;
    }
    let ttr = c.types as f64 / w;
    [
        ari, flesch, fk, fog, smog, coleman, lix, rix, dale, wps, cpw, spw, ttr,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn syllable_heuristic() {
        assert_eq!(count_syllables("food"), 1);
        assert_eq!(count_syllables("service"), 2);
        assert_eq!(count_syllables("delicious"), 3);
        assert_eq!(count_syllables("table"), 2);
        assert_eq!(count_syllables("make"), 1);
        assert_eq!(count_syllables("the"), 1);
        assert_eq!(count_syllables("42"), 1);
        assert_eq!(count_syllables("restaurant"), 3);
    }

    #[test]
    fn ari_hand_counted() {
        // "the staff was very friendly ." : 5 words, 1 sentence,
        // characters 3 + 5 + 3 + 4 + 8 = 23
        let r = TokenSequence::from_cleaned("the staff was very friendly .");
        let c = TextCounts::of(&r);
        assert_eq!((c.words, c.sentences, c.characters), (5, 1, 23));
        let ari = 4.71 * (23.0 / 5.0) + 0.5 * (5.0 / 1.0) - 21.43;
        let got = readability_scores(&r).unwrap()[0];
        assert!((got - ari).abs() < 1e-9, "{got} vs {ari}");
    }

    #[test]
    fn sentence_runs_and_trailing_fragment() {
        let r = TokenSequence::from_cleaned("wow ! ! great food . we will return");
        let c = TextCounts::of(&r);
        assert_eq!(c.sentences, 3);
        assert_eq!(c.words, 6);
    }

    #[test]
    fn duplication_invariance() {
        let base = "i love this place ! the tacos were delicious , and the service was excellent .";
        let r = TokenSequence::from_cleaned(base);
        let dup = TokenSequence::from_cleaned(&format!("{base} {base}"));
        let a = readability_scores(&r).unwrap();
        let b = readability_scores(&dup).unwrap();
        for i in RATIO_METRICS {
            assert!((a[i] - b[i]).abs() < 1e-9, "{}: {} vs {}", READABILITY_NAMES[i], a[i], b[i]);
        }
        assert!(b[12] < a[12], "type-token ratio is not a ratio metric");
    }

    #[test]
    fn degenerate_inputs_are_finite() {
        for text in ["wow", "!", ". . .", "supercalifragilistic"] {
            let s = readability_scores(&TokenSequence::from_cleaned(text)).unwrap();
            assert!(s.iter().all(|v| v.is_finite()), "{text}: {s:?}");
        }
        assert!(readability_scores(&TokenSequence::default()).is_err());
    }
}
