use std::fmt;

/// Options for [`clean_text_with`].
#[derive(Debug, Clone, Copy)]
pub struct CleanOptions {
    pub lowercase: bool,
}

impl Default for CleanOptions {
    fn default() -> Self {
        CleanOptions { lowercase: true }
    }
}

/// Normalizes raw review text with the default options (lowercasing on).
pub fn clean_text(raw: &str) -> String {
    clean_text_with(raw, CleanOptions::default())
}

/// Drops non-printable and non-ASCII characters, splits every punctuation
/// character into its own token and collapses whitespace.
///
/// ASCII whitespace (tabs, newlines) counts as a separator; anything else
/// outside the printable range is removed without leaving a gap, so
/// `"caf\u{e9}"` becomes `"caf"`.
pub fn clean_text_with(raw: &str, opts: CleanOptions) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    let push_sep = |out: &mut String, pending: &mut bool| {
        if *pending && !out.is_empty() {
            out.push(' ');
        }
        *pending = false;
    };
    for ch in raw.chars() {
        if ch.is_ascii_whitespace() {
            pending_space = true;
        } else if ch.is_ascii_alphanumeric() {
            push_sep(&mut out, &mut pending_space);
            out.push(if opts.lowercase {
                ch.to_ascii_lowercase()
            } else {
                ch
            });
        } else if ch.is_ascii_graphic() {
            // punctuation stands alone
            pending_space = true;
            push_sep(&mut out, &mut pending_space);
            out.push(ch);
            pending_space = true;
        }
    }
    out
}

/// True for tokens made of a single punctuation character.
pub fn is_punctuation(token: &str) -> bool {
    let mut chars = token.chars();
    matches!((chars.next(), chars.next()), (Some(c), None) if c.is_ascii_punctuation())
}

/// True for tokens containing at least one ASCII letter.
pub fn is_word(token: &str) -> bool {
    token.bytes().any(|b| b.is_ascii_alphabetic())
}

/// An ordered list of cleaned tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    pub fn new(tokens: Vec<String>) -> Self {
        TokenSequence(tokens)
    }

    /// Splits already-cleaned text on single spaces.
    pub fn from_cleaned(text: &str) -> Self {
        TokenSequence(text.split_whitespace().map(str::to_owned).collect())
    }

    /// Cleans `raw` and tokenizes the result.
    pub fn from_raw(raw: &str) -> Self {
        Self::from_cleaned(&clean_text(raw))
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    /// Joins tokens with single spaces.
    pub fn to_text(&self) -> String {
        self.0.join(" ")
    }

    pub fn word_count(&self) -> usize {
        self.iter().filter(|t| is_word(t)).count()
    }
}

impl fmt::Display for TokenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl From<Vec<String>> for TokenSequence {
    fn from(tokens: Vec<String>) -> Self {
        TokenSequence(tokens)
    }
}

impl<'a> FromIterator<&'a str> for TokenSequence {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        TokenSequence(iter.into_iter().map(str::to_owned).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tab_and_repeated_bang() {
        assert_eq!(clean_text("Great\tfood!!"), "great food ! !");
    }

    #[test]
    fn empty_stays_empty() {
        assert_eq!(clean_text(""), "");
        assert_eq!(clean_text("   \n\t "), "");
    }

    #[test]
    fn comma_and_period_split() {
        // hand-applied: "," and "." become standalone tokens
        assert_eq!(
            clean_text("Pricey, but worth it."),
            "pricey , but worth it ."
        );
    }

    #[test]
    fn non_ascii_removed_without_gap() {
        assert_eq!(clean_text("Caf\u{e9} \u{2014} nice"), "caf nice");
        assert_eq!(clean_text("a\u{7}b"), "ab");
    }

    #[test]
    fn apostrophes_and_initials() {
        assert_eq!(clean_text("P.F. Chang's"), "p . f . chang ' s");
    }

    #[test]
    fn case_kept_when_disabled() {
        let s = clean_text_with("Great Food!", CleanOptions { lowercase: false });
        assert_eq!(s, "Great Food !");
    }

    #[test]
    fn word_and_punct_predicates() {
        assert!(is_punctuation("."));
        assert!(!is_punctuation(".."));
        assert!(!is_punctuation("a"));
        assert!(is_word("chang"));
        assert!(is_word("3rd"));
        assert!(!is_word("42"));
        assert!(!is_word("!"));
    }

    proptest! {
        #[test]
        fn idempotent(s in "\\PC{0,80}") {
            let once = clean_text(&s);
            prop_assert_eq!(clean_text(&once), once.clone());
        }

        #[test]
        fn printable_ascii_only(s in "\\PC{0,80}") {
            let c = clean_text(&s);
            prop_assert!(c.bytes().all(|b| (0x20..0x7f).contains(&b)));
            prop_assert!(!c.contains("  "));
            prop_assert!(!c.starts_with(' ') && !c.ends_with(' '));
        }

        #[test]
        fn detokenize_retokenize_round_trip(s in "[ -~\\t]{0,80}") {
            let seq = TokenSequence::from_raw(&s);
            let again = TokenSequence::from_cleaned(&seq.to_text());
            prop_assert_eq!(&again, &seq);
            for tok in seq.iter() {
                prop_assert!(tok.len() == 1 || tok.bytes().all(|b| b.is_ascii_alphanumeric()));
            }
        }
    }
}
