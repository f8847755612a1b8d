//! Reproducible experiments: decoding sweeps, diversity statistics,
//! detector training and cross-category transfer.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{
    build_vocabulary, records_to_pairs, split_corpus, Context, IngestStats, ParallelCorpus, PreprocessConfig,
    RawRecord, TokenSequence, Vocabulary,
};
use crate::decoder::{generate_batch, GenerationParams, GrammarSet};
use crate::detector::{
    BoostConfig, ClassificationReport, Detector, FeatureConfig, Label, LabeledReview, ScoreHistogram,
};
use crate::error::{Error, Result};
use crate::lm::{LanguageModel, NgramConfig, NgramModel};
use crate::obfuscator::{Dictionary, Obfuscator};
use crate::rng::{derive_seed, stream_rng};

/// Name of the unpenalized greedy cell added to every sweep.
pub const GREEDY: &str = "greedy";
/// Name given to the (0.3, -5) cell.
pub const NMT_FAKE_STAR: &str = "nmt-fake*";

/// Hex SHA-256 of the JSON form of `value`, embedded in reports.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("config serializes");
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub b: f64,
    pub lambda: f64,
}

impl SweepCell {
    pub fn name(&self) -> String {
        if self.b == 0.3 && self.lambda == -5.0 {
            NMT_FAKE_STAR.to_owned()
        } else {
            format!("b{}_l{}", self.b, self.lambda)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub cells: Vec<SweepCell>,
    pub reviews_per_cell: usize,
    pub alpha: f64,
    pub min_len: usize,
    pub max_len: usize,
    /// Obfuscation rates applied to penalized cells; the greedy cell is
    /// never obfuscated.
    pub p_typo: f64,
    pub p_spell: f64,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let cells = [(0.3, -3.0), (0.3, -5.0), (0.5, -4.0), (0.7, -3.0), (0.7, -5.0), (0.9, -4.0)]
            .into_iter()
            .map(|(b, lambda)| SweepCell { b, lambda })
            .collect();
        let d = GenerationParams::default();
        SweepConfig {
            cells,
            reviews_per_cell: 200,
            alpha: d.alpha,
            min_len: d.min_len,
            max_len: d.max_len,
            p_typo: d.p_typo,
            p_spell: d.p_spell,
            seed: 0,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        for c in &self.cells {
            self.params_for(c).validate()?;
        }
        Ok(())
    }

    fn params_for(&self, cell: &SweepCell) -> GenerationParams {
        GenerationParams {
            b: cell.b,
            lambda: cell.lambda,
            alpha: self.alpha,
            min_len: self.min_len,
            max_len: self.max_len,
            p_typo: self.p_typo,
            p_spell: self.p_spell,
            seed: derive_seed(self.seed, &cell.name()),
        }
    }

    fn greedy_params(&self) -> GenerationParams {
        GenerationParams {
            min_len: self.min_len,
            max_len: self.max_len,
            p_typo: 0.0,
            p_spell: 0.0,
            seed: derive_seed(self.seed, GREEDY),
            ..GenerationParams::unpenalized()
        }
    }
}

/// Diversity statistics of one set of reviews.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityStats {
    pub cell: String,
    pub reviews: usize,
    pub distinct_opening_bigrams: usize,
    pub max_opening_bigram_share: f64,
    pub top_opening_bigram: String,
    /// Distinct unigrams over total unigrams.
    pub distinct_1: f64,
    pub distinct_2: f64,
    pub mean_length: f64,
}

impl DiversityStats {
    pub fn of(cell: &str, reviews: &[TokenSequence]) -> Self {
        let mut openings: HashMap<String, usize> = HashMap::new();
        let mut uni: HashMap<&str, ()> = HashMap::new();
        let mut bi: HashMap<(&str, &str), ()> = HashMap::new();
        let (mut n_uni, mut n_bi, mut total_len) = (0usize, 0usize, 0usize);
        for r in reviews {
            let t = r.tokens();
            total_len += t.len();
            let key = t.iter().take(2).cloned().collect::<Vec<_>>().join(" ");
            *openings.entry(key).or_default() += 1;
            for w in t {
                uni.insert(w, ());
                n_uni += 1;
            }
            for w in t.windows(2) {
                bi.insert((&w[0], &w[1]), ());
                n_bi += 1;
            }
        }
        // most frequent opening, ties by lexical order
        let top = openings
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(k, v)| (k.clone(), *v));
        let n = reviews.len();
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        DiversityStats {
            cell: cell.to_owned(),
            reviews: n,
            distinct_opening_bigrams: openings.len(),
            max_opening_bigram_share: ratio(top.as_ref().map_or(0, |t| t.1), n),
            top_opening_bigram: top.map(|t| t.0).unwrap_or_default(),
            distinct_1: ratio(uni.len(), n_uni),
            distinct_2: ratio(bi.len(), n_bi),
            mean_length: ratio(total_len, n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityReport {
    pub config_hash: String,
    pub cells: Vec<DiversityStats>,
}

impl DiversityReport {
    pub fn cell(&self, name: &str) -> Option<&DiversityStats> {
        self.cells.iter().find(|c| c.cell == name)
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("# config {}\n", self.config_hash);
        s.push_str("cell,reviews,distinct_opening_bigrams,max_opening_bigram_share,top_opening_bigram,distinct_1,distinct_2,mean_length\n");
        for c in &self.cells {
            s.push_str(&format!(
                "{},{},{},{:.6},\"{}\",{:.6},{:.6},{:.3}\n",
                c.cell,
                c.reviews,
                c.distinct_opening_bigrams,
                c.max_opening_bigram_share,
                c.top_opening_bigram.replace('"', "\"\""),
                c.distinct_1,
                c.distinct_2,
                c.mean_length
            ));
        }
        s
    }
}

/// Generated reviews of every sweep cell, greedy baseline first.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub cells: Vec<(String, Vec<TokenSequence>)>,
    pub report: DiversityReport,
}

impl SweepResult {
    pub fn reviews(&self, name: &str) -> Option<&[TokenSequence]> {
        self.cells.iter().find(|c| c.0 == name).map(|c| c.1.as_slice())
    }
}

/// The first `n` contexts, cycling when fewer are available.
fn take_contexts(contexts: &[Context], n: usize) -> Result<Vec<Context>> {
    if n > 0 && contexts.is_empty() {
        return Err(Error::Empty("contexts"));
    }
    Ok((0..n).map(|i| contexts[i % contexts.len()].clone()).collect())
}

/// Generates one review per context with `params`, then obfuscates with
/// its rates.
pub fn generate_cell<M: LanguageModel + ?Sized>(
    lm: &M,
    contexts: &[Context],
    params: &GenerationParams,
    grammar: &GrammarSet,
    obfuscator: &Obfuscator,
) -> Result<Vec<TokenSequence>> {
    let generated: Vec<TokenSequence> = generate_batch(lm, contexts, params, grammar)?
        .into_iter()
        .map(|g| g.tokens)
        .collect();
    obfuscate_batch(
        &generated,
        params.p_typo,
        params.p_spell,
        params.seed,
        obfuscator,
        lm.vocabulary(),
    )
}

/// Obfuscates review `i` with rng stream `i` of a seed derived from `seed`.
/// Zero rates return the input unchanged.
pub fn obfuscate_batch(
    reviews: &[TokenSequence],
    p_typo: f64,
    p_spell: f64,
    seed: u64,
    obfuscator: &Obfuscator,
    dictionary: &(dyn Dictionary + Sync),
) -> Result<Vec<TokenSequence>> {
    if p_typo == 0.0 && p_spell == 0.0 {
        return Ok(reviews.to_vec());
    }
    let seed = derive_seed(seed, "obfuscate");
    reviews
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let mut rng = stream_rng(seed, i as u64);
            obfuscator
                .obfuscate(r, p_typo, p_spell, dictionary, &mut rng)
                .map(|o| o.0)
        })
        .collect()
}

/// Generates every cell of `config` plus the greedy baseline and measures
/// their diversity.
pub fn run_sweep<M: LanguageModel + ?Sized>(
    lm: &M,
    contexts: &[Context],
    config: &SweepConfig,
    grammar: &GrammarSet,
) -> Result<SweepResult> {
    config.validate()?;
    let ctx = take_contexts(contexts, config.reviews_per_cell)?;
    let obf = Obfuscator::default();
    let mut jobs = vec![(GREEDY.to_owned(), config.greedy_params())];
    jobs.extend(config.cells.iter().map(|c| (c.name(), config.params_for(c))));
    let mut cells = Vec::with_capacity(jobs.len());
    for (name, params) in jobs {
        let reviews = generate_cell(lm, &ctx, &params, grammar, &obf)?;
        log::info!("sweep cell {name}: {} reviews", reviews.len());
        cells.push((name, reviews));
    }
    let report = DiversityReport {
        config_hash: config_hash(config),
        cells: cells.iter().map(|(n, r)| DiversityStats::of(n, r)).collect(),
    };
    Ok(SweepResult { cells, report })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorExperimentConfig {
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub features: FeatureConfig,
    pub boost: BoostConfig,
    /// Larger/smaller training class ratio above which a warning is added.
    pub max_imbalance: f64,
    pub seed: u64,
}

impl Default for DetectorExperimentConfig {
    fn default() -> Self {
        DetectorExperimentConfig {
            train_per_class: 1000,
            test_per_class: 500,
            features: FeatureConfig::default(),
            boost: BoostConfig::default(),
            max_imbalance: 1.5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DetectorOutcome {
    pub detector: Detector,
    pub report: ClassificationReport,
    pub histogram: ScoreHistogram,
    pub config_hash: String,
}

/// Seeded shuffle of one class, split into (train, test).
fn split_class(
    docs: &[TokenSequence],
    label: Label,
    cfg: &DetectorExperimentConfig,
    stream: &str,
) -> Result<(Vec<LabeledReview>, Vec<LabeledReview>)> {
    if docs.len() <= cfg.test_per_class {
        return Err(Error::param(
            "corpus",
            format!("{label} class has {} reviews, needs more than {}", docs.len(), cfg.test_per_class),
        ));
    }
    let mut idx: Vec<usize> = (0..docs.len()).collect();
    idx.shuffle(&mut stream_rng(derive_seed(cfg.seed, stream), 0));
    let make = |i: &usize| LabeledReview {
        label,
        review: docs[*i].clone(),
    };
    let test = idx[..cfg.test_per_class].iter().map(make).collect();
    let end = (cfg.test_per_class + cfg.train_per_class).min(idx.len());
    let train = idx[cfg.test_per_class..end].iter().map(make).collect();
    Ok((train, test))
}

fn imbalance_warning(n_human: usize, n_machine: usize, max_ratio: f64) -> Option<String> {
    let (lo, hi) = (n_human.min(n_machine).max(1) as f64, n_human.max(n_machine) as f64);
    (hi / lo > max_ratio).then(|| {
        format!("class imbalance: {n_human} human vs {n_machine} machine training reviews")
    })
}

/// Trains a detector on a seeded split of human vs machine reviews and
/// evaluates it on the held-out part.
pub fn detector_experiment(
    human: &[TokenSequence],
    machine: &[TokenSequence],
    cfg: &DetectorExperimentConfig,
) -> Result<DetectorOutcome> {
    let (h_train, h_test) = split_class(human, Label::Human, cfg, "human")?;
    let (m_train, m_test) = split_class(machine, Label::Machine, cfg, "machine")?;
    let warning = imbalance_warning(h_train.len(), m_train.len(), cfg.max_imbalance);
    let train: Vec<_> = h_train.into_iter().chain(m_train).collect();
    let test: Vec<_> = h_test.into_iter().chain(m_test).collect();
    let detector = Detector::train(&train, cfg.features.clone(), cfg.boost)?;
    let (mut report, histogram) = detector.evaluate(&test)?;
    report.warnings.extend(warning);
    Ok(DetectorOutcome {
        detector,
        report,
        histogram,
        config_hash: config_hash(cfg),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferCell {
    pub average_f: f64,
    pub machine_recall: f64,
}

/// Rows are training categories, columns evaluation categories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub categories: Vec<String>,
    pub cells: Vec<Vec<TransferCell>>,
    pub config_hash: String,
}

impl TransferMatrix {
    pub fn get(&self, train: &str, eval: &str) -> Option<TransferCell> {
        let i = self.categories.iter().position(|c| c == train)?;
        let j = self.categories.iter().position(|c| c == eval)?;
        Some(self.cells[i][j])
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("# config {}\ntrain,eval,average_f,machine_recall\n", self.config_hash);
        for (i, row) in self.cells.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                s.push_str(&format!(
                    "{},{},{:.6},{:.6}\n",
                    self.categories[i], self.categories[j], c.average_f, c.machine_recall
                ));
            }
        }
        s
    }
}

/// For every ordered pair of categories, trains a detector on
/// `train-category vs human` and scores it on the held-out part of the
/// evaluation category together with held-out human reviews. Features come
/// from `cfg`; see [`char_ngram_config`].
pub fn transfer_experiment(
    human: &[TokenSequence],
    categories: &[(String, Vec<TokenSequence>)],
    cfg: &DetectorExperimentConfig,
) -> Result<TransferMatrix> {
    if categories.len() < 2 {
        return Err(Error::param("categories", "need at least two machine categories"));
    }
    let (h_train, h_test) = split_class(human, Label::Human, cfg, "human")?;
    let splits: Vec<_> = categories
        .iter()
        .map(|(name, docs)| split_class(docs, Label::Machine, cfg, name))
        .collect::<Result<_>>()?;
    let mut cells = Vec::with_capacity(categories.len());
    for (m_train, _) in &splits {
        let train: Vec<_> = h_train.iter().chain(m_train).cloned().collect();
        let detector = Detector::train(&train, cfg.features.clone(), cfg.boost)?;
        let row = splits
            .par_iter()
            .map(|(_, m_test)| {
                let test: Vec<_> = h_test.iter().chain(m_test).cloned().collect();
                let (r, _) = detector.evaluate(&test)?;
                Ok(TransferCell {
                    average_f: r.average_f,
                    machine_recall: r.machine.recall,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        cells.push(row);
    }
    Ok(TransferMatrix {
        categories: categories.iter().map(|c| c.0.clone()).collect(),
        cells,
        config_hash: config_hash(cfg),
    })
}

/// `base` with character n-gram features only, as used for transfer runs.
pub fn char_ngram_config(base: &DetectorExperimentConfig) -> DetectorExperimentConfig {
    DetectorExperimentConfig {
        features: FeatureConfig::char_ngrams(),
        ..base.clone()
    }
}

/// Corpus, vocabulary and model produced from raw records.
#[derive(Debug)]
pub struct PreparedModel {
    pub corpus: ParallelCorpus,
    pub stats: IngestStats,
    pub vocab: Vocabulary,
    pub lm: NgramModel,
}

/// Ingests, splits, builds the vocabulary and trains the n-gram model.
pub fn prepare_model(
    records: &[RawRecord],
    preprocess: &PreprocessConfig,
    lm: NgramConfig,
    seed: u64,
) -> Result<PreparedModel> {
    let (pairs, stats) = records_to_pairs(records, preprocess)?;
    let corpus = split_corpus(pairs, preprocess.n_val, preprocess.n_test, derive_seed(seed, "split"))?;
    let vocab = build_vocabulary(&corpus.train, preprocess.min_frequency)?;
    let lm = NgramModel::train(&corpus.train, &vocab, lm)?;
    Ok(PreparedModel {
        corpus,
        stats,
        vocab,
        lm,
    })
}

/// Everything an end-to-end experiment needs, as one JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub preprocess: PreprocessConfig,
    pub lm: NgramConfig,
    pub sweep: SweepConfig,
    pub detector: DetectorExperimentConfig,
    /// Number of held-out human reviews and contexts drawn for experiments.
    pub human_reviews: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            preprocess: PreprocessConfig {
                n_val: 2000,
                n_test: 2000,
                ..Default::default()
            },
            lm: NgramConfig::default(),
            sweep: SweepConfig::default(),
            detector: DetectorExperimentConfig::default(),
            human_reviews: 1500,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn hash(&self) -> String {
        config_hash(self)
    }
}

/// Output layout of one experiment run.
#[derive(Debug, Clone)]
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn create(root: &Path) -> Result<Self> {
        for sub in ["reviews", "models", "reports"] {
            let p = root.join(sub);
            fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
        }
        Ok(RunDir { root: root.to_owned() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn reviews(&self, name: &str) -> PathBuf {
        self.root.join("reviews").join(format!("{}.txt", file_stem(name)))
    }

    pub fn model(&self, name: &str) -> PathBuf {
        self.root.join("models").join(file_stem(name))
    }

    pub fn report(&self, name: &str) -> PathBuf {
        self.root.join("reports").join(file_stem(name))
    }

    fn write(&self, path: &Path, contents: &[u8]) -> Result<()> {
        fs::write(path, contents).map_err(|e| Error::io(path, e))
    }

    pub fn write_reviews(&self, name: &str, reviews: &[TokenSequence]) -> Result<PathBuf> {
        let p = self.reviews(name);
        self.write(&p, write_lines(reviews).as_bytes())?;
        Ok(p)
    }

    pub fn write_report(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let p = self.report(name);
        self.write(&p, contents.as_bytes())?;
        Ok(p)
    }

    /// Report text and CSV for a detector run, plus its histogram CSV.
    pub fn write_detector_outcome(&self, name: &str, outcome: &DetectorOutcome) -> Result<()> {
        let header = format!("# config {}\n", outcome.config_hash);
        self.write_report(&format!("{name}.txt"), &format!("{header}{}", outcome.report))?;
        self.write_report(&format!("{name}.csv"), &format!("{header}{}", outcome.report.to_csv()))?;
        self.write_report(
            &format!("{name}-histogram.csv"),
            &format!("{header}{}", outcome.histogram.to_csv()),
        )?;
        outcome.detector.save(&self.model(&format!("{name}.bin")))
    }
}

fn file_stem(name: &str) -> String {
    name.replace('*', "star").replace(['/', '\\'], "_")
}

/// One review per line.
pub fn write_lines(reviews: &[TokenSequence]) -> String {
    let mut s = String::new();
    for r in reviews {
        s.push_str(&r.to_text());
        s.push('\n');
    }
    s
}

pub fn read_lines(path: &Path) -> Result<Vec<TokenSequence>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.lines().map(TokenSequence::from_cleaned).collect())
}

/// Summary written by [`run_experiment`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub config_hash: String,
    pub ingest: IngestStats,
    pub vocabulary_size: usize,
    pub perplexity: f64,
    pub diversity: DiversityReport,
    pub detector: ClassificationReport,
    pub transfer: TransferMatrix,
}

/// Runs the whole pipeline on `records`: model, sweep, detector on human
/// vs NMT-Fake*, and greedy vs NMT-Fake* transfer. Artifacts land in `run`.
pub fn run_experiment(records: &[RawRecord], cfg: &ExperimentConfig, run: &RunDir) -> Result<ExperimentSummary> {
    let prepared = prepare_model(records, &cfg.preprocess, cfg.lm, cfg.seed)?;
    prepared.vocab.save(&run.model("vocab.tsv"))?;
    prepared.lm.save(&run.model("lm.bin"))?;
    let perplexity = crate::lm::perplexity(&prepared.lm, &prepared.corpus.val)?;

    let human: Vec<TokenSequence> = prepared
        .corpus
        .val
        .iter()
        .take(cfg.human_reviews)
        .map(|p| p.review.clone())
        .collect();
    let contexts: Vec<Context> = prepared.corpus.test.iter().map(|p| p.context.clone()).collect();
    run.write_reviews("human", &human)?;

    let sweep = run_sweep(&prepared.lm, &contexts, &cfg.sweep, &GrammarSet::bundled())?;
    for (name, reviews) in &sweep.cells {
        run.write_reviews(name, reviews)?;
    }
    run.write_report("diversity.csv", &sweep.report.to_csv())?;

    // detector and transfer need more machine reviews than a sweep cell
    let need = cfg.detector.train_per_class + cfg.detector.test_per_class;
    let grammar = GrammarSet::bundled();
    let obf = Obfuscator::default();
    let ctx = take_contexts(&contexts, need)?;
    let nmt_cell = SweepCell { b: 0.3, lambda: -5.0 };
    let nmt = generate_cell(&prepared.lm, &ctx, &cfg.sweep.params_for(&nmt_cell), &grammar, &obf)?;
    let greedy = generate_cell(&prepared.lm, &ctx, &cfg.sweep.greedy_params(), &grammar, &obf)?;
    run.write_reviews("detector-nmt-fake*", &nmt)?;
    run.write_reviews("detector-greedy", &greedy)?;

    let outcome = detector_experiment(&human, &nmt, &cfg.detector)?;
    run.write_detector_outcome("detector", &outcome)?;

    let tcfg = char_ngram_config(&cfg.detector);
    let transfer = transfer_experiment(
        &human,
        &[(GREEDY.to_owned(), greedy), (NMT_FAKE_STAR.to_owned(), nmt)],
        &tcfg,
    )?;
    run.write_report("transfer.csv", &transfer.to_csv())?;

    let summary = ExperimentSummary {
        config_hash: cfg.hash(),
        ingest: prepared.stats,
        vocabulary_size: prepared.vocab.len(),
        perplexity,
        diversity: sweep.report,
        detector: outcome.report,
        transfer,
    };
    run.write_report("summary.json", &serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seqs(lines: &[&str]) -> Vec<TokenSequence> {
        lines.iter().map(|l| TokenSequence::from_cleaned(l)).collect()
    }

    #[test]
    fn diversity_by_hand() {
        let r = seqs(&["great food .", "great food !", "nice place", "great service"]);
        let d = DiversityStats::of("x", &r);
        assert_eq!(d.distinct_opening_bigrams, 3);
        assert_eq!(d.max_opening_bigram_share, 0.5);
        assert_eq!(d.top_opening_bigram, "great food");
        // unigrams: great food . great food ! nice place great service -> 10 tokens, 7 distinct
        assert!((d.distinct_1 - 0.7).abs() < 1e-12);
        assert!((d.mean_length - 2.5).abs() < 1e-12);
    }

    #[test]
    fn empty_cell_is_not_an_error() {
        let d = DiversityStats::of("x", &[]);
        assert_eq!(d.reviews, 0);
        assert_eq!(d.max_opening_bigram_share, 0.0);
    }

    #[test]
    fn default_grid_and_names() {
        let s = SweepConfig::default();
        assert_eq!(s.cells.len(), 6);
        assert!(s.validate().is_ok());
        assert_eq!(s.cells[1].name(), NMT_FAKE_STAR);
        assert_eq!(s.cells[0].name(), "b0.3_l-3");
        let bad = SweepConfig {
            cells: vec![SweepCell { b: 1.5, lambda: -1.0 }],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn config_hash_changes_with_config() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.seed = 1;
        assert_eq!(a.hash(), ExperimentConfig::default().hash());
        assert_ne!(a.hash(), b.hash());
        let json = serde_json::to_string(&a).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
        let partial: ExperimentConfig = serde_json::from_str(r#"{"seed": 4}"#).unwrap();
        assert_eq!(partial.sweep, SweepConfig::default());
    }

    #[test]
    fn imbalance_warning_threshold() {
        assert!(imbalance_warning(100, 100, 1.5).is_none());
        assert!(imbalance_warning(100, 200, 1.5).is_some());
    }
}
