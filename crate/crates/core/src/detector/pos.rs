//! Lexicon and suffix-rule part-of-speech tagger over a coarse tag set.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PosTag {
    Adj,
    Adp,
    Adv,
    Aux,
    Cconj,
    Det,
    Intj,
    Noun,
    Num,
    Part,
    Pron,
    Propn,
    Punct,
    Sconj,
    Sym,
    Verb,
    X,
}

impl PosTag {
    pub const ALL: [PosTag; 17] = [
        PosTag::Adj,
        PosTag::Adp,
        PosTag::Adv,
        PosTag::Aux,
        PosTag::Cconj,
        PosTag::Det,
        PosTag::Intj,
        PosTag::Noun,
        PosTag::Num,
        PosTag::Part,
        PosTag::Pron,
        PosTag::Propn,
        PosTag::Punct,
        PosTag::Sconj,
        PosTag::Sym,
        PosTag::Verb,
        PosTag::X,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PosTag::Adj => "ADJ",
            PosTag::Adp => "ADP",
            PosTag::Adv => "ADV",
            PosTag::Aux => "AUX",
            PosTag::Cconj => "CCONJ",
            PosTag::Det => "DET",
            PosTag::Intj => "INTJ",
            PosTag::Noun => "NOUN",
            PosTag::Num => "NUM",
            PosTag::Part => "PART",
            PosTag::Pron => "PRON",
            PosTag::Propn => "PROPN",
            PosTag::Punct => "PUNCT",
            PosTag::Sconj => "SCONJ",
            PosTag::Sym => "SYM",
            PosTag::Verb => "VERB",
            PosTag::X => "X",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

const LEXICON: &[(PosTag, &str)] = &[
    (PosTag::Det, "a an the this that these those every each some any no another all both either neither such what which whose"),
    (PosTag::Pron, "i me my mine myself we us our ours ourselves you your yours yourself yourselves he him his himself she her hers herself it its itself they them their theirs themselves who whom someone everyone anyone nobody nothing something everything anything one"),
    (PosTag::Cconj, "and but or nor yet plus"),
    (PosTag::Sconj, "if because although though while whereas unless until since whether than when whenever where wherever as so"),
    (PosTag::Adp, "of in on at to for with from by about into over after before under between through during without within around near across against along behind beside beyond like per via off up down out"),
    (PosTag::Aux, "is am are was were be been being do does did have has had will would shall should can could may might must don didn doesn isn wasn aren weren won wouldn couldn shouldn haven hasn hadn ca wo"),
    (PosTag::Part, "not n't"),
    (PosTag::Adv, "very really so too quite always never often sometimes usually also just still already again even only here there now then soon back definitely absolutely totally highly pretty super extremely well almost ever rather maybe probably instead once twice away"),
    (PosTag::Intj, "wow yum yummy oh omg ok okay yes yeah hey please thanks thank lol ugh meh"),
    (PosTag::Num, "zero two three four five six seven eight nine ten eleven twelve twenty thirty forty fifty hundred first second third half dozen"),
    (PosTag::Adj, "good great best better bad worse worst nice amazing awesome excellent delicious tasty fresh friendly slow fast quick hot cold warm cool small big large huge little new old clean dirty cheap expensive pricey reasonable fantastic wonderful perfect terrible horrible awful decent average mediocre okay fine favorite favourite authentic spicy sweet sour salty bland crispy soggy juicy tender dry rude helpful attentive polite busy quiet loud cozy cute happy sad sure full empty whole other same different next last many much more most few several free top overall outstanding incredible solid yummy flavorful generous"),
    (PosTag::Verb, "go went gone going come came get got gotten make made take took taken love loved loves like liked try tried recommend recommended order ordered eat ate eaten want wanted need needed say said know knew think thought see saw seen give gave find found tell told ask asked feel felt leave left keep kept serve served wait waited visit visited return returned enjoy enjoyed taste tasted pay paid bring brought share shared sit sat stop stopped"),
    (PosTag::Noun, "food service place staff time restaurant menu server waiter waitress owner price prices dish dishes meal lunch dinner breakfast brunch table atmosphere experience order drinks drink beer wine coffee pizza burger burgers sandwich salad soup chicken beef pork fish rice noodles tacos taco sushi steak fries dessert bar location area spot night day week visit friends family portion portions sauce flavor quality value"),
];

fn lexicon() -> &'static HashMap<&'static str, PosTag> {
    static LEX: OnceLock<HashMap<&'static str, PosTag>> = OnceLock::new();
    LEX.get_or_init(|| {
        let mut m = HashMap::new();
        // earlier rows win for words listed twice
        for (tag, words) in LEXICON {
            for w in words.split_whitespace() {
                m.entry(w).or_insert(*tag);
            }
        }
        m
    })
}

/// Suffix rules tried in order for words missing from the lexicon.
const SUFFIX_RULES: &[(&str, PosTag)] = &[
    ("ing", PosTag::Verb),
    ("ed", PosTag::Verb),
    ("ly", PosTag::Adv),
    ("ous", PosTag::Adj),
    ("ful", PosTag::Adj),
    ("ive", PosTag::Adj),
    ("able", PosTag::Adj),
    ("ible", PosTag::Adj),
    ("less", PosTag::Adj),
    ("ish", PosTag::Adj),
    ("est", PosTag::Adj),
    ("ic", PosTag::Adj),
    ("al", PosTag::Adj),
    ("y", PosTag::Adj),
    ("tion", PosTag::Noun),
    ("sion", PosTag::Noun),
    ("ment", PosTag::Noun),
    ("ness", PosTag::Noun),
    ("ity", PosTag::Noun),
    ("er", PosTag::Noun),
    ("ize", PosTag::Verb),
    ("ise", PosTag::Verb),
    ("ate", PosTag::Verb),
];

fn tag_word(tok: &str) -> PosTag {
    if tok.is_empty() {
        return PosTag::X;
    }
    if tok.len() == 1 {
        let c = tok.as_bytes()[0];
        if c.is_ascii_punctuation() {
            return if matches!(c, b'$' | b'%' | b'&' | b'+' | b'=' | b'@' | b'#' | b'*' | b'<' | b'>' | b'^' | b'~' | b'|') {
                PosTag::Sym
            } else {
                PosTag::Punct
            };
        }
    }
    if tok.bytes().all(|b| b.is_ascii_digit()) {
        return PosTag::Num;
    }
    if let Some(&t) = lexicon().get(tok) {
        return t;
    }
    if tok.bytes().any(|b| b.is_ascii_digit()) {
        return PosTag::Num;
    }
    if tok.bytes().any(|b| b.is_ascii_uppercase()) {
        return PosTag::Propn;
    }
    for (suffix, tag) in SUFFIX_RULES {
        if tok.len() > suffix.len() + 2 && tok.ends_with(suffix) {
            return *tag;
        }
    }
    PosTag::Noun
}

/// Tags each token. Contractions split by cleaning (`don ' t`, `it ' s`)
/// are resolved from the token after the apostrophe.
pub fn pos_tag<S: AsRef<str>>(tokens: &[S]) -> Vec<PosTag> {
    let mut tags: Vec<PosTag> = tokens.iter().map(|t| tag_word(t.as_ref())).collect();
    for i in 2..tokens.len() {
        if tokens[i - 1].as_ref() != "'" {
            continue;
        }
        tags[i] = match tokens[i].as_ref() {
            "t" => PosTag::Part,
            "s" => {
                // it's / that's read as a verb form, otherwise possessive
                if matches!(tags[i - 2], PosTag::Pron | PosTag::Det) {
                    PosTag::Aux
                } else {
                    PosTag::Part
                }
            }
            "ll" | "ve" | "re" | "m" | "d" => PosTag::Aux,
            _ => tags[i],
        };
    }
    tags
}
