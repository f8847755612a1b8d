//! Human-like error injection: rule-based misspellings and keyboard typos.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{is_word, TokenSequence, Vocabulary};
use crate::error::{Error, Result};

const BUNDLED_RULES: &str = include_str!("../data/spelling_rules.tsv");

const QWERTY_ROWS: [&str; 3] = ["qwertyuiop", "asdfghjkl", "zxcvbnm"];

/// Ordered (correct, misspelled) word pairs.
#[derive(Debug, Clone, Default)]
pub struct SpellingRuleSet {
    rules: Vec<(String, String)>,
    by_correct: HashMap<String, Vec<usize>>,
}

impl SpellingRuleSet {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_RULES).expect("bundled rules are valid")
    }

    /// Parses `correct<TAB>misspelled` lines; `#` lines are comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut set = SpellingRuleSet::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: &str| Error::Parse {
                line: i + 1,
                message: message.to_owned(),
            };
            let (correct, wrong) = line
                .split_once('\t')
                .ok_or_else(|| bad("expected correct<TAB>misspelled"))?;
            let (correct, wrong) = (correct.trim(), wrong.trim());
            if correct.is_empty()
                || wrong.is_empty()
                || correct.contains(char::is_whitespace)
                || wrong.contains(char::is_whitespace)
            {
                return Err(bad("rule forms must be single tokens"));
            }
            if correct.eq_ignore_ascii_case(wrong) {
                return Err(bad("rule maps a word to itself"));
            }
            set.push(correct.to_ascii_lowercase(), wrong.to_ascii_lowercase());
        }
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    fn push(&mut self, correct: String, wrong: String) {
        self.by_correct
            .entry(correct.clone())
            .or_default()
            .push(self.rules.len());
        self.rules.push((correct, wrong));
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rules(&self) -> &[(String, String)] {
        &self.rules
    }

    pub fn matches(&self, word: &str) -> bool {
        self.by_correct.contains_key(&word.to_ascii_lowercase())
    }
}

/// Replaces `word` with a misspelling when a rule matches; a leading capital
/// is carried over. When several rules share a correct form one is picked
/// uniformly.
pub fn apply_spelling_rule<R: Rng + ?Sized>(word: &str, rules: &SpellingRuleSet, rng: &mut R) -> String {
    let Some(candidates) = rules.by_correct.get(&word.to_ascii_lowercase()) else {
        return word.to_owned();
    };
    let pick = if candidates.len() == 1 {
        candidates[0]
    } else {
        candidates[rng.gen_range(0..candidates.len())]
    };
    let wrong = &rules.rules[pick].1;
    if word.starts_with(|c: char| c.is_ascii_uppercase()) {
        let mut out = wrong.clone();
        out[..1].make_ascii_uppercase();
        out
    } else {
        wrong.clone()
    }
}

/// Edit costs for a weighted Levenshtein metric with adjacent transpositions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KeyboardWeights {
    pub adjacent_substitution: f64,
    pub distant_substitution: f64,
    pub insertion: f64,
    pub deletion: f64,
    pub transposition: f64,
    /// Explicit costs keyed by a two-character string `"ab"` (a replaced by b).
    pub substitutions: BTreeMap<String, f64>,
}

impl Default for KeyboardWeights {
    fn default() -> Self {
        KeyboardWeights {
            adjacent_substitution: 1.0,
            distant_substitution: 2.0,
            insertion: 1.5,
            deletion: 1.5,
            transposition: 1.2,
            substitutions: BTreeMap::new(),
        }
    }
}

fn key_position(c: char) -> Option<(i32, i32)> {
    let c = c.to_ascii_lowercase();
    QWERTY_ROWS
        .iter()
        .enumerate()
        .find_map(|(row, keys)| keys.find(c).map(|col| (row as i32, col as i32)))
}

/// Keys touching each other on a QWERTY layout, staggered rows included.
pub fn keys_adjacent(a: char, b: char) -> bool {
    let (Some((ra, ca)), Some((rb, cb))) = (key_position(a), key_position(b)) else {
        return false;
    };
    if a.eq_ignore_ascii_case(&b) {
        return false;
    }
    match rb - ra {
        0 => (ca - cb).abs() == 1,
        // the row below is shifted right by about half a key
        1 => cb == ca || cb == ca - 1,
        -1 => ca == cb || ca == cb - 1,
        _ => false,
    }
}

impl KeyboardWeights {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let w: KeyboardWeights = serde_json::from_str(&text)?;
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let base = [
            ("adjacent_substitution", self.adjacent_substitution),
            ("distant_substitution", self.distant_substitution),
            ("insertion", self.insertion),
            ("deletion", self.deletion),
            ("transposition", self.transposition),
        ];
        for (name, v) in base {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("cost must be positive, got {v}")));
            }
        }
        if self.adjacent_substitution >= self.distant_substitution {
            return Err(Error::param(
                "adjacent_substitution",
                "must be cheaper than distant_substitution",
            ));
        }
        for (pair, &v) in &self.substitutions {
            if pair.chars().count() != 2 || !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(
                    "substitutions",
                    format!("entry {pair:?} needs two characters and a positive cost"),
                ));
            }
        }
        Ok(())
    }

    pub fn substitution_cost(&self, from: char, to: char) -> f64 {
        let key: String = [from, to].iter().collect();
        if let Some(&c) = self.substitutions.get(&key) {
            return c;
        }
        if keys_adjacent(from, to) {
            self.adjacent_substitution
        } else {
            self.distant_substitution
        }
    }
}

/// Word membership used to favor typos that land on real words.
pub trait Dictionary {
    fn contains_word(&self, word: &str) -> bool;
}

impl Dictionary for Vocabulary {
    fn contains_word(&self, word: &str) -> bool {
        self.contains(word)
    }
}

impl Dictionary for HashSet<String> {
    fn contains_word(&self, word: &str) -> bool {
        self.contains(word)
    }
}

/// A single-edit neighbour of a word with its sampling weight.
#[derive(Debug, Clone, PartialEq)]
pub struct TypoCandidate {
    pub word: String,
    pub cost: f64,
    pub weight: f64,
}

/// Every distinct string one deletion, insertion, substitution or adjacent
/// transposition away from `word`, weighted by `1 / cost` and multiplied by
/// `real_word_bonus` when the result is in `dictionary`. The input itself is
/// never a candidate. Output is sorted by candidate text.
pub fn typo_candidates(
    word: &str,
    weights: &KeyboardWeights,
    dictionary: &dyn Dictionary,
    real_word_bonus: f64,
) -> Vec<TypoCandidate> {
    let chars: Vec<char> = word.chars().collect();
    let mut best: BTreeMap<String, f64> = BTreeMap::new();
    let mut offer = |s: String, cost: f64| {
        if s != word {
            let e = best.entry(s).or_insert(f64::INFINITY);
            *e = e.min(cost);
        }
    };
    let letters = 'a'..='z';
    for i in 0..chars.len() {
        let mut del = chars.clone();
        del.remove(i);
        offer(del.into_iter().collect(), weights.deletion);
        for c in letters.clone() {
            if c != chars[i] {
                let mut sub = chars.clone();
                sub[i] = c;
                offer(sub.into_iter().collect(), weights.substitution_cost(chars[i], c));
            }
        }
        if i + 1 < chars.len() && chars[i] != chars[i + 1] {
            let mut tr = chars.clone();
            tr.swap(i, i + 1);
            offer(tr.into_iter().collect(), weights.transposition);
        }
    }
    for i in 0..=chars.len() {
        for c in letters.clone() {
            let mut ins = chars.clone();
            ins.insert(i, c);
            offer(ins.into_iter().collect(), weights.insertion);
        }
    }
    best.into_iter()
        .map(|(w, cost)| {
            let bonus = if dictionary.contains_word(&w) {
                real_word_bonus
            } else {
                1.0
            };
            TypoCandidate {
                weight: bonus / cost,
                word: w,
                cost,
            }
        })
        .collect()
}

/// Samples one single-edit typo of `word`. Words shorter than two characters
/// come back unchanged.
pub fn inject_typo<R: Rng + ?Sized>(
    word: &str,
    weights: &KeyboardWeights,
    dictionary: &dyn Dictionary,
    real_word_bonus: f64,
    rng: &mut R,
) -> String {
    if word.chars().count() < 2 {
        return word.to_owned();
    }
    let candidates = typo_candidates(word, weights, dictionary, real_word_bonus);
    let total: f64 = candidates.iter().map(|c| c.weight).sum();
    let mut target = rng.gen::<f64>() * total;
    for c in &candidates {
        target -= c.weight;
        if target < 0.0 {
            return c.word.clone();
        }
    }
    candidates.last().map(|c| c.word.clone()).unwrap_or_else(|| word.to_owned())
}

/// Everything the obfuscation pass needs besides the probabilities.
#[derive(Debug, Clone)]
pub struct Obfuscator {
    pub rules: SpellingRuleSet,
    pub weights: KeyboardWeights,
    pub real_word_bonus: f64,
}

impl Default for Obfuscator {
    fn default() -> Self {
        Obfuscator {
            rules: SpellingRuleSet::bundled(),
            weights: KeyboardWeights::default(),
            real_word_bonus: 10.0,
        }
    }
}

/// Per-token outcome of an obfuscation pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    None,
    Spelling,
    Typo,
}

impl Obfuscator {
    /// Applies errors to each word token independently. Two draws are taken
    /// per word token (spelling, then typo) whether or not they are used, so
    /// streams stay aligned across probability settings. Non-word tokens
    /// consume no randomness and are never changed.
    pub fn obfuscate<R: Rng + ?Sized>(
        &self,
        review: &TokenSequence,
        p_typo: f64,
        p_spell: f64,
        dictionary: &dyn Dictionary,
        rng: &mut R,
    ) -> Result<(TokenSequence, Vec<Perturbation>)> {
        for (name, p) in [("p_typo", p_typo), ("p_spell", p_spell)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param(name, format!("must lie in [0, 1], got {p}")));
            }
        }
        let mut out = Vec::with_capacity(review.len());
        let mut kinds = Vec::with_capacity(review.len());
        for tok in review.iter() {
            if !is_word(tok) {
                out.push(tok.to_owned());
                kinds.push(Perturbation::None);
                continue;
            }
            let spell = rng.gen_bool(p_spell);
            let typo = rng.gen_bool(p_typo);
            if spell && self.rules.matches(tok) {
                out.push(apply_spelling_rule(tok, &self.rules, rng));
                kinds.push(Perturbation::Spelling);
            } else if typo && tok.chars().count() >= 2 {
                out.push(inject_typo(tok, &self.weights, dictionary, self.real_word_bonus, rng));
                kinds.push(Perturbation::Typo);
            } else {
                out.push(tok.to_owned());
                kinds.push(Perturbation::None);
            }
        }
        Ok((TokenSequence::new(out), kinds))
    }
}

/// Convenience wrapper around [`Obfuscator::obfuscate`] that drops the
/// per-token outcomes.
pub fn obfuscate<R: Rng + ?Sized>(
    review: &TokenSequence,
    p_typo: f64,
    p_spell: f64,
    obfuscator: &Obfuscator,
    dictionary: &dyn Dictionary,
    rng: &mut R,
) -> Result<TokenSequence> {
    obfuscator
        .obfuscate(review, p_typo, p_spell, dictionary, rng)
        .map(|(seq, _)| seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use proptest::prelude::*;

    fn dict(words: &[&str]) -> HashSet<String> {
        words.iter().map(|s| s.to_string()).collect()
    }

    /// Restricted Damerau-Levenshtein distance, unit costs.
    fn osa_distance(a: &str, b: &str) -> usize {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for i in 0..=a.len() {
            d[i][0] = i;
        }
        for j in 0..=b.len() {
            d[0][j] = j;
        }
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                let cost = usize::from(a[i - 1] != b[j - 1]);
                d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + cost);
                if i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] {
                    d[i][j] = d[i][j].min(d[i - 2][j - 2] + 1);
                }
            }
        }
        d[a.len()][b.len()]
    }

    #[test]
    fn bundled_rules_count_and_lookup() {
        let rules = SpellingRuleSet::bundled();
        assert_eq!(rules.len(), 80);
        let mut rng = stream_rng(0, 0);
        assert_eq!(apply_spelling_rule("definitely", &rules, &mut rng), "definately");
        assert_eq!(apply_spelling_rule("Definitely", &rules, &mut rng), "Definately");
        assert_eq!(apply_spelling_rule("burrito", &rules, &mut rng), "burrito");
    }

    #[test]
    fn rule_parse_errors() {
        assert!(SpellingRuleSet::parse("same\tsame\n").is_err());
        assert!(SpellingRuleSet::parse("two words\tx\n").is_err());
        assert!(SpellingRuleSet::parse("nodelimiter\n").is_err());
        let ok = SpellingRuleSet::parse("# c\na\tb\na\tc\n").unwrap();
        assert_eq!(ok.len(), 2);
        let mut seen = HashSet::new();
        let mut rng = stream_rng(1, 0);
        for _ in 0..50 {
            seen.insert(apply_spelling_rule("a", &ok, &mut rng));
        }
        assert_eq!(seen, dict(&["b", "c"]));
    }

    #[test]
    fn adjacency() {
        assert!(keys_adjacent('f', 'g'));
        assert!(keys_adjacent('f', 'r'));
        assert!(keys_adjacent('f', 'c'));
        assert!(keys_adjacent('k', 'o'));
        assert!(!keys_adjacent('f', 'p'));
        assert!(!keys_adjacent('a', 'a'));
        assert!(!keys_adjacent('q', 'z'));
        let w = KeyboardWeights::default();
        assert!(w.substitution_cost('o', 'p') < w.substitution_cost('o', 'z'));
    }

    #[test]
    fn weights_validation() {
        assert!(KeyboardWeights::default().validate().is_ok());
        let mut w = KeyboardWeights::default();
        w.adjacent_substitution = 3.0;
        assert!(w.validate().is_err());
        let mut w = KeyboardWeights::default();
        w.insertion = 0.0;
        assert!(w.validate().is_err());
        let w: KeyboardWeights = serde_json::from_str(r#"{"substitutions": {"ab": 0.5}}"#).unwrap();
        assert!(w.validate().is_ok());
        assert_eq!(w.substitution_cost('a', 'b'), 0.5);
    }

    #[test]
    fn candidates_are_single_edits() {
        let w = KeyboardWeights::default();
        let d = dict(&[]);
        for word in ["food", "tacos", "ok", "aab"] {
            let cands = typo_candidates(word, &w, &d, 1.0);
            assert!(!cands.is_empty());
            for c in cands {
                assert_ne!(c.word, word);
                assert_eq!(osa_distance(word, &c.word), 1, "{word} -> {}", c.word);
            }
        }
    }

    #[test]
    fn candidate_weights_match_enumeration() {
        // independent enumeration for "food": costs by edit type
        let w = KeyboardWeights::default();
        let d = dict(&["good", "foot", "fool", "mood"]);
        let cands = typo_candidates("food", &w, &d, 10.0);
        let get = |s: &str| cands.iter().find(|c| c.word == s).unwrap().clone();
        // f->g is adjacent: cost 1, real word
        assert_eq!(get("good").cost, 1.0);
        assert!((get("good").weight - 10.0).abs() < 1e-12);
        // d->t is distant: cost 2, real word
        assert_eq!(get("foot").cost, 2.0);
        assert!((get("foot").weight - 5.0).abs() < 1e-12);
        // o->k adjacent: cost 1, not a word
        assert!((get("fokd").weight - 1.0).abs() < 1e-12);
        // delete one 'o' (two positions yield the same string)
        assert_eq!(get("fod").cost, 1.5);
        // no transposition of equal letters
        assert!(cands.iter().all(|c| c.word != "food"));
        // count: 4 positions * 25 substitutions + 5*26 insertions + 4 deletions + 2 swaps,
        // minus duplicates; verify against a brute-force set
        let mut brute = HashSet::new();
        let ch: Vec<char> = "food".chars().collect();
        for i in 0..4 {
            let mut v = ch.clone();
            v.remove(i);
            brute.insert(v.iter().collect::<String>());
            for c in 'a'..='z' {
                let mut v = ch.clone();
                v[i] = c;
                brute.insert(v.iter().collect::<String>());
            }
        }
        for i in 0..=4 {
            for c in 'a'..='z' {
                let mut v = ch.clone();
                v.insert(i, c);
                brute.insert(v.iter().collect::<String>());
            }
        }
        for i in 0..3 {
            let mut v = ch.clone();
            v.swap(i, i + 1);
            brute.insert(v.iter().collect::<String>());
        }
        brute.remove("food");
        assert_eq!(cands.len(), brute.len());
    }

    #[test]
    fn typo_sampling_follows_weights() {
        let w = KeyboardWeights::default();
        let d = dict(&["good", "foot", "fool", "mood", "hood", "wood", "fold", "ford", "flood", "foods"]);
        let cands = typo_candidates("food", &w, &d, 10.0);
        let total: f64 = cands.iter().map(|c| c.weight).sum();
        let mut rng = stream_rng(2024, 0);
        let n = 10_000;
        let mut freq: HashMap<String, usize> = HashMap::new();
        for _ in 0..n {
            *freq.entry(inject_typo("food", &w, &d, 10.0, &mut rng)).or_default() += 1;
        }
        for target in ["good", "foot", "fokd", "fod"] {
            let p = cands.iter().find(|c| c.word == target).unwrap().weight / total;
            let observed = *freq.get(target).unwrap_or(&0) as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((observed - p).abs() < 4.0 * sigma + 1e-9, "{target}: {observed} vs {p}");
        }
        let real: usize = d.iter().map(|w| freq.get(w).copied().unwrap_or(0)).sum();
        assert!(freq.get("good").copied().unwrap_or(0) > freq.get("fokd").copied().unwrap_or(0));
        assert!(real as f64 / n as f64 > 0.2);
    }

    #[test]
    fn typo_degenerate_and_deterministic() {
        let w = KeyboardWeights::default();
        let d = dict(&[]);
        let mut rng = stream_rng(0, 0);
        assert_eq!(inject_typo("a", &w, &d, 10.0, &mut rng), "a");
        let a = inject_typo("service", &w, &d, 10.0, &mut stream_rng(5, 1));
        let b = inject_typo("service", &w, &d, 10.0, &mut stream_rng(5, 1));
        assert_eq!(a, b);
        assert_ne!(a, "service");
    }

    #[test]
    fn obfuscate_identity_and_forced_spelling() {
        let ob = Obfuscator::default();
        let d = dict(&[]);
        let review = TokenSequence::from_cleaned("i definitely recommend it , really !");
        let (same, _) = ob.obfuscate(&review, 0.0, 0.0, &d, &mut stream_rng(1, 0)).unwrap();
        assert_eq!(same.to_text(), review.to_text());
        let (spelled, kinds) = ob.obfuscate(&review, 0.0, 1.0, &d, &mut stream_rng(1, 0)).unwrap();
        assert_eq!(spelled.to_text(), "i definately reccomend it , realy !");
        assert_eq!(kinds[1], Perturbation::Spelling);
        assert!(ob.obfuscate(&review, 1.5, 0.0, &d, &mut stream_rng(1, 0)).is_err());
    }

    #[test]
    fn obfuscate_typo_rate() {
        let ob = Obfuscator::default();
        let d = dict(&[]);
        let words = ["great", "food", "service", "tacos", "friendly", "staff", "place", "menu"];
        let tokens: Vec<String> = (0..10_000).map(|i| words[i % words.len()].to_owned()).collect();
        let review = TokenSequence::new(tokens);
        let (_, kinds) = ob.obfuscate(&review, 0.05, 0.0, &d, &mut stream_rng(77, 0)).unwrap();
        let frac = kinds.iter().filter(|k| **k != Perturbation::None).count() as f64 / 10_000.0;
        assert!((frac - 0.05).abs() < 0.01, "{frac}");
    }

    proptest! {
        #[test]
        fn preserves_count_and_punctuation(
            words in prop::collection::vec("[a-z]{1,9}|[.,!?']", 0..40),
            p_typo in 0.0f64..=1.0,
            p_spell in 0.0f64..=1.0,
            seed in any::<u64>(),
        ) {
            let ob = Obfuscator::default();
            let d = dict(&["good", "food"]);
            let review = TokenSequence::new(words);
            let (out, kinds) = ob.obfuscate(&review, p_typo, p_spell, &d, &mut stream_rng(seed, 0)).unwrap();
            prop_assert_eq!(out.len(), review.len());
            for ((a, b), k) in review.iter().zip(out.iter()).zip(&kinds) {
                if !is_word(a) {
                    prop_assert_eq!(a, b);
                }
                if *k == Perturbation::Typo {
                    prop_assert_eq!(osa_distance(a, b), 1);
                }
            }
            let (again, _) = ob.obfuscate(&review, p_typo, p_spell, &d, &mut stream_rng(seed, 0)).unwrap();
            prop_assert_eq!(again, out);
        }
    }
}
