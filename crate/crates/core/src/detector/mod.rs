//! Stylometric features and a boosted tree detector for machine-written
//! reviews.

pub mod boost;
pub mod features;
pub mod pos;
pub mod readability;
pub mod report;
pub mod tree;

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use boost::{classify, train_adaboost, BoostConfig, BoostedEnsemble, Booster, RoundInfo};
pub use features::{extract_features, FeatureConfig, FeatureGroup, FeatureSpace, FeatureVector};
pub use pos::{pos_tag, PosTag};
pub use readability::{readability_scores, READABILITY_NAMES};
pub use report::{ClassMetrics, ClassificationReport, Confusion, ScoreHistogram};

use crate::corpus::TokenSequence;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Human,
    Machine,
}

impl Label {
    /// +1 for machine, -1 for human.
    pub fn sign(self) -> f64 {
        match self {
            Label::Human => -1.0,
            Label::Machine => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Human => "human",
            Label::Machine => "machine",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "human" | "0" => Ok(Label::Human),
            "machine" | "1" => Ok(Label::Machine),
            other => Err(Error::param("label", format!("unknown label `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledReview {
    pub label: Label,
    pub review: TokenSequence,
}

/// Reads `label<TAB>text` lines. Text is taken as already cleaned.
pub fn read_labeled_tsv(path: &Path) -> Result<Vec<LabeledReview>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let (label, text) = line.split_once('\t').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: "expected `label<TAB>text`".into(),
        })?;
        let label = label.parse().map_err(|e: Error| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(LabeledReview {
            label,
            review: TokenSequence::from_cleaned(text),
        });
    }
    Ok(out)
}

pub fn write_labeled_tsv(path: &Path, rows: &[LabeledReview]) -> Result<()> {
    let mut s = String::new();
    for r in rows {
        s.push_str(r.label.as_str());
        s.push('\t');
        s.push_str(&r.review.to_text());
        s.push('\n');
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

/// Extracts features for many documents in parallel, keeping input order.
pub fn extract_all(space: &FeatureSpace, rows: &[LabeledReview]) -> Vec<FeatureVector> {
    rows.par_iter()
        .map(|r| space.extract(&r.review, Some(r.label)))
        .collect()
}

const MAGIC: &[u8; 4] = b"RFDT";
const FORMAT_VERSION: u32 = 1;

/// A fitted feature space together with the ensemble trained on it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Detector {
    pub space: FeatureSpace,
    pub ensemble: BoostedEnsemble,
}

impl Detector {
    /// Fits the feature space on `train` and boosts on it.
    pub fn train(train: &[LabeledReview], features: FeatureConfig, boost: BoostConfig) -> Result<Self> {
        let docs: Vec<TokenSequence> = train.iter().map(|r| r.review.clone()).collect();
        let space = FeatureSpace::fit(&docs, features)?;
        let vectors = extract_all(&space, train);
        let ensemble = train_adaboost(&vectors, boost)?;
        Ok(Detector { space, ensemble })
    }

    pub fn classify(&self, review: &TokenSequence) -> Result<(Label, f64)> {
        self.ensemble.classify(&self.space.extract(review, None))
    }

    /// Per-review (label, margin) in input order.
    pub fn classify_all(&self, reviews: &[TokenSequence]) -> Result<Vec<(Label, f64)>> {
        reviews.par_iter().map(|r| self.classify(r)).collect()
    }

    pub fn evaluate(&self, test: &[LabeledReview]) -> Result<(ClassificationReport, ScoreHistogram)> {
        let reviews: Vec<TokenSequence> = test.iter().map(|r| r.review.clone()).collect();
        let preds = self.classify_all(&reviews)?;
        let truth: Vec<Label> = test.iter().map(|r| r.label).collect();
        let predicted: Vec<Label> = preds.iter().map(|p| p.0).collect();
        let report = ClassificationReport::from_predictions(&truth, &predicted);
        let margins: Vec<(Label, f64)> = truth.iter().zip(&preds).map(|(t, p)| (*t, p.1)).collect();
        let hist = ScoreHistogram::from_margins(&margins, ScoreHistogram::DEFAULT_BINS);
        Ok((report, hist))
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&self.space.hash().to_le_bytes());
        bincode::serialize_into(&mut out, self).map_err(|e| Error::BadModel(e.to_string()))?;
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 16 || &bytes[..4] != MAGIC {
            return Err(Error::BadModel("not a detector file".into()));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::BadModel(format!("unsupported version {version}")));
        }
        let header_hash = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
        let mut d: Detector =
            bincode::deserialize(&bytes[16..]).map_err(|e| Error::BadModel(e.to_string()))?;
        d.space.rebuild_index();
        d.space.verify_hash()?;
        for found in [header_hash, d.ensemble.space_hash] {
            if found != d.space.hash() {
                return Err(Error::FeatureSpaceMismatch {
                    expected: d.space.hash(),
                    found,
                });
            }
        }
        Ok(d)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = self.to_bytes()?;
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&bytes).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Vec<LabeledReview> {
        let human = [
            "the tacos were great , but parking was a nightmare .",
            "i waited forty minutes for a cold burger . never again",
            "cute spot ! my sister loved the mango lassi",
            "service was slow but the curry made up for it .",
        ];
        let machine = [
            "great food and great service . i will be back .",
            "great food . the staff was very friendly .",
            "great place for lunch . the food was great .",
            "great food , great service , great prices .",
        ];
        human
            .iter()
            .map(|t| (Label::Human, t))
            .chain(machine.iter().map(|t| (Label::Machine, t)))
            .map(|(label, t)| LabeledReview {
                label,
                review: TokenSequence::from_cleaned(t),
            })
            .collect()
    }

    #[test]
    fn label_parsing() {
        assert_eq!("Machine".parse::<Label>().unwrap(), Label::Machine);
        assert_eq!("0".parse::<Label>().unwrap(), Label::Human);
        assert!("robot".parse::<Label>().is_err());
    }

    #[test]
    fn trains_and_round_trips() {
        let data = toy();
        let d = Detector::train(&data, FeatureConfig::default(), BoostConfig::default()).unwrap();
        let (report, hist) = d.evaluate(&data).unwrap();
        assert_eq!(report.average_f, 1.0);
        assert_eq!(hist.human.iter().sum::<usize>(), 4);
        let bytes = d.to_bytes().unwrap();
        let back = Detector::from_bytes(&bytes).unwrap();
        assert_eq!(back.to_bytes().unwrap(), bytes);
        let r = &data[0].review;
        assert_eq!(back.classify(r).unwrap(), d.classify(r).unwrap());
    }

    #[test]
    fn corrupted_hash_rejected() {
        let d = Detector::train(&toy(), FeatureConfig::char_ngrams(), BoostConfig::default()).unwrap();
        let mut bytes = d.to_bytes().unwrap();
        bytes[8] ^= 0xff;
        assert!(matches!(
            Detector::from_bytes(&bytes),
            Err(Error::FeatureSpaceMismatch { .. })
        ));
        assert!(Detector::from_bytes(b"nope").is_err());
    }

    #[test]
    fn tsv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.tsv");
        write_labeled_tsv(&p, &toy()).unwrap();
        assert_eq!(read_labeled_tsv(&p).unwrap(), toy());
        std::fs::write(&p, "human no tab here\n").unwrap();
        assert!(matches!(read_labeled_tsv(&p), Err(Error::Parse { line: 1, .. })));
    }
}
