use std::collections::HashSet;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;

use reviewforge::corpus::{
    build_vocabulary, read_aligned, read_contexts, read_jsonl, records_to_pairs, split_corpus, synthetic_records,
    write_synthetic_jsonl, Context, FieldMapping, PreprocessConfig, SynthConfig, TokenSequence, Vocabulary,
};
use reviewforge::decoder::{generate_batch, BatchMetadata, GenerationParams, GrammarSet};
use reviewforge::detector::{read_labeled_tsv, BoostConfig, Detector, FeatureConfig, Label, LabeledReview};
use reviewforge::harness::{
    obfuscate_batch, read_lines, run_experiment, run_sweep, transfer_experiment, write_lines, DetectorExperimentConfig,
    ExperimentConfig, RunDir, SweepConfig,
};
use reviewforge::lm::{perplexity, LanguageModel, NgramConfig, NgramModel};
use reviewforge::obfuscator::{KeyboardWeights, Obfuscator, SpellingRuleSet};

use crate::UsageError;

/// Files a command reads and writes, known before it runs.
pub struct Plan {
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    /// Default manifest location when `--manifest` is not given.
    pub manifest: PathBuf,
    pub seed: Option<u64>,
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn opt_inputs(paths: &[&Option<PathBuf>]) -> Vec<PathBuf> {
    paths.iter().filter_map(|p| (*p).clone()).collect()
}

// ------------------------------------------------------------ sample-corpus

#[derive(Debug, Args, Serialize)]
pub struct SampleCorpus {
    /// Output JSON-lines file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 60_000)]
    pub records: usize,
    #[arg(long, default_value_t = 600)]
    pub businesses: usize,
    #[arg(long, env = "REVIEWFORGE_SEED", default_value_t = 2017)]
    pub seed: u64,
}

impl SampleCorpus {
    pub fn plan(&self) -> Plan {
        Plan {
            inputs: vec![],
            outputs: vec![self.out.clone()],
            manifest: sidecar(&self.out, ".manifest.json"),
            seed: Some(self.seed),
        }
    }

    pub fn run(&self) -> Result<()> {
        let cfg = SynthConfig {
            records: self.records,
            businesses: self.businesses,
            seed: self.seed,
            ..Default::default()
        };
        let records = synthetic_records(&cfg);
        if let Some(dir) = self.out.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        write_synthetic_jsonl(&self.out, &records)?;
        println!("wrote {} records to {}", records.len(), self.out.display());
        Ok(())
    }
}

// ------------------------------------------------------------ preprocess

#[derive(Debug, Args, Serialize)]
pub struct Preprocess {
    /// JSON-lines review records.
    #[arg(long)]
    pub input: PathBuf,
    /// JSON file mapping record fields to input keys.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    /// Output directory for the aligned corpus and vocabulary.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub min_frequency: u64,
    /// Reviews with more tokens than this are dropped.
    #[arg(long, default_value_t = 50)]
    pub max_length: usize,
    /// Keep records carrying any of these tags (repeatable).
    #[arg(long = "keep-tag", default_values_t = vec!["Restaurants".to_string()])]
    pub keep_tags: Vec<String>,
    /// Keep records regardless of their tags.
    #[arg(long)]
    pub all_tags: bool,
    #[arg(long, default_value_t = 15_000)]
    pub n_val: usize,
    #[arg(long, default_value_t = 3_000)]
    pub n_test: usize,
    #[arg(long)]
    pub no_lowercase: bool,
    #[arg(long, env = "REVIEWFORGE_SEED", default_value_t = 0)]
    pub seed: u64,
}

impl Preprocess {
    pub fn plan(&self) -> Plan {
        Plan {
            inputs: [vec![self.input.clone()], opt_inputs(&[&self.mapping])].concat(),
            outputs: vec![self.out.clone()],
            manifest: self.out.join("manifest.json"),
            seed: Some(self.seed),
        }
    }

    pub fn run(&self) -> Result<()> {
        let mapping = match &self.mapping {
            Some(p) => FieldMapping::load(p)?,
            None => FieldMapping::default(),
        };
        let cfg = PreprocessConfig {
            lowercase: !self.no_lowercase,
            min_frequency: self.min_frequency,
            max_review_tokens: self.max_length,
            keep_tags: if self.all_tags { vec![] } else { self.keep_tags.clone() },
            n_val: self.n_val,
            n_test: self.n_test,
        };
        let records = read_jsonl(&self.input, &mapping)?;
        let (pairs, stats) = records_to_pairs(&records, &cfg)?;
        let corpus = split_corpus(pairs, cfg.n_val, cfg.n_test, self.seed)?;
        let vocab = build_vocabulary(&corpus.train, cfg.min_frequency)?;
        corpus.write_aligned(&self.out)?;
        vocab.save(&self.out.join("vocab.tsv"))?;
        write_file(&self.out.join("ingest.json"), (serde_json::to_string_pretty(&stats)? + "\n").as_bytes())?;
        println!(
            "{} records, {} kept ({} filtered by tag, {} too long, {} empty); train/val/test {}/{}/{}; |V| = {}",
            stats.records,
            stats.kept,
            stats.filtered_tags,
            stats.too_long,
            stats.empty_review,
            corpus.train.len(),
            corpus.val.len(),
            corpus.test.len(),
            vocab.len()
        );
        Ok(())
    }
}

// ------------------------------------------------------------ train-lm

#[derive(Debug, Args, Serialize)]
pub struct TrainLm {
    /// Directory written by `preprocess`.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Vocabulary file; defaults to `<corpus>/vocab.tsv`.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub order: usize,
    #[arg(long, default_value_t = 0.75)]
    pub discount: f64,
}

impl TrainLm {
    fn vocab_path(&self) -> PathBuf {
        self.vocab.clone().unwrap_or_else(|| self.corpus.join("vocab.tsv"))
    }

    pub fn plan(&self) -> Plan {
        Plan {
            inputs: vec![
                self.corpus.join("context-train.txt"),
                self.corpus.join("reviews-train.txt"),
                self.vocab_path(),
            ],
            outputs: vec![self.out.clone()],
            manifest: sidecar(&self.out, ".manifest.json"),
            seed: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        NgramConfig {
            order: self.order,
            discount: self.discount,
        }
        .validate()
        .map_err(|e| UsageError(e.to_string()).into())
    }

    pub fn run(&self) -> Result<()> {
        let vocab = Vocabulary::load(&self.vocab_path())?;
        let train = read_aligned(
            &self.corpus.join("context-train.txt"),
            &self.corpus.join("reviews-train.txt"),
        )?;
        let cfg = NgramConfig {
            order: self.order,
            discount: self.discount,
        };
        let lm = NgramModel::train(&train, &vocab, cfg)?;
        if let Some(dir) = self.out.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        lm.save(&self.out)?;
        let val_ctx = self.corpus.join("context-val.txt");
        if val_ctx.exists() {
            let val = read_aligned(&val_ctx, &self.corpus.join("reviews-val.txt"))?;
            if !val.is_empty() {
                println!("validation perplexity {:.3}", perplexity(&lm, &val)?);
            }
        }
        println!("n-gram table sizes {:?}", lm.table_sizes());
        Ok(())
    }
}

// ------------------------------------------------------------ generate

#[derive(Debug, Args, Serialize)]
pub struct Generate {
    /// Model written by `train-lm`.
    #[arg(long)]
    pub lm: PathBuf,
    /// One context per line.
    #[arg(long)]
    pub contexts: PathBuf,
    /// Output file, one review per line. A `.meta.json` sidecar records
    /// per-review mask digests.
    #[arg(long)]
    pub out: PathBuf,
    /// Bernoulli probability that a token is penalized.
    #[arg(long, default_value_t = 0.3)]
    pub b: f64,
    /// Soft penalty in log-likelihood units (<= 0).
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    pub lambda: f64,
    /// Per-step decay of the start penalty.
    #[arg(long, default_value_t = 2.0 / 3.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 10)]
    pub min_len: usize,
    #[arg(long, default_value_t = 50)]
    pub max_len: usize,
    /// Per-word typo probability.
    #[arg(long, default_value_t = 0.01)]
    pub p_typo: f64,
    /// Per-word misspelling probability.
    #[arg(long, default_value_t = 0.01)]
    pub p_spell: f64,
    /// Word list of grammar tokens; defaults to the bundled list.
    #[arg(long)]
    pub grammar: Option<PathBuf>,
    /// Number of reviews; contexts are cycled. Defaults to one per context.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, env = "REVIEWFORGE_SEED", default_value_t = 0)]
    pub seed: u64,
}

impl Generate {
    fn params(&self) -> GenerationParams {
        GenerationParams {
            b: self.b,
            lambda: self.lambda,
            alpha: self.alpha,
            min_len: self.min_len,
            max_len: self.max_len,
            p_typo: self.p_typo,
            p_spell: self.p_spell,
            seed: self.seed,
        }
    }

    pub fn plan(&self) -> Plan {
        Plan {
            inputs: [vec![self.lm.clone(), self.contexts.clone()], opt_inputs(&[&self.grammar])].concat(),
            outputs: vec![self.out.clone(), sidecar(&self.out, ".meta.json")],
            manifest: sidecar(&self.out, ".manifest.json"),
            seed: Some(self.seed),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params().validate().map_err(|e| UsageError(e.to_string()).into())
    }

    pub fn run(&self) -> Result<()> {
        let lm = NgramModel::load(&self.lm)?;
        let grammar = match &self.grammar {
            Some(p) => GrammarSet::load(p)?,
            None => GrammarSet::bundled(),
        };
        let mut contexts = read_contexts(&self.contexts)?;
        if let Some(n) = self.count {
            if contexts.is_empty() && n > 0 {
                bail!("{} has no contexts", self.contexts.display());
            }
            contexts = (0..n).map(|i| contexts[i % contexts.len()].clone()).collect::<Vec<Context>>();
        }
        let params = self.params();
        let generated = generate_batch(&lm, &contexts, &params, &grammar)?;
        let meta = BatchMetadata::new(&params, &generated);
        let reviews: Vec<_> = generated.into_iter().map(|g| g.tokens).collect();
        let reviews = obfuscate_batch(
            &reviews,
            params.p_typo,
            params.p_spell,
            params.seed,
            &Obfuscator::default(),
            lm.vocabulary(),
        )?;
        write_file(&self.out, write_lines(&reviews).as_bytes())?;
        write_file(
            &sidecar(&self.out, ".meta.json"),
            (serde_json::to_string_pretty(&meta)? + "\n").as_bytes(),
        )?;
        println!("generated {} reviews into {}", reviews.len(), self.out.display());
        Ok(())
    }
}

// ------------------------------------------------------------ obfuscate

#[derive(Debug, Args, Serialize)]
pub struct Obfuscate {
    /// Reviews, one per line, already cleaned.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    pub p_typo: f64,
    #[arg(long, default_value_t = 0.01)]
    pub p_spell: f64,
    /// Vocabulary whose words get a bonus as typo targets.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Tab-separated `correct<TAB>misspelled` pairs; defaults to the bundled list.
    #[arg(long)]
    pub rules: Option<PathBuf>,
    /// JSON keyboard edit weights.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long, default_value_t = 10.0)]
    pub real_word_bonus: f64,
    #[arg(long, env = "REVIEWFORGE_SEED", default_value_t = 0)]
    pub seed: u64,
}

impl Obfuscate {
    pub fn plan(&self) -> Plan {
        Plan {
            inputs: [
                vec![self.input.clone()],
                opt_inputs(&[&self.vocab, &self.rules, &self.weights]),
            ]
            .concat(),
            outputs: vec![self.out.clone()],
            manifest: sidecar(&self.out, ".manifest.json"),
            seed: Some(self.seed),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("--p-typo", self.p_typo), ("--p-spell", self.p_spell)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(UsageError(format!("{name} must lie in [0, 1], got {p}")).into());
            }
        }
        if !(self.real_word_bonus > 0.0) {
            return Err(UsageError("--real-word-bonus must be positive".into()).into());
        }
        Ok(())
    }

    pub fn run(&self) -> Result<()> {
        let reviews = read_lines(&self.input)?;
        let obf = Obfuscator {
            rules: match &self.rules {
                Some(p) => SpellingRuleSet::load(p)?,
                None => SpellingRuleSet::bundled(),
            },
            weights: match &self.weights {
                Some(p) => KeyboardWeights::load(p)?,
                None => KeyboardWeights::default(),
            },
            real_word_bonus: self.real_word_bonus,
        };
        let out = match &self.vocab {
            Some(p) => {
                let v = Vocabulary::load(p)?;
                obfuscate_batch(&reviews, self.p_typo, self.p_spell, self.seed, &obf, &v)?
            }
            None => {
                let empty: HashSet<String> = HashSet::new();
                obfuscate_batch(&reviews, self.p_typo, self.p_spell, self.seed, &obf, &empty)?
            }
        };
        let changed = out.iter().zip(&reviews).filter(|(a, b)| a != b).count();
        write_file(&self.out, write_lines(&out).as_bytes())?;
        println!("{changed} of {} reviews changed", reviews.len());
        Ok(())
    }
}

// ------------------------------------------------------------ train-detector

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum FeatureSet {
    /// Readability, POS unigrams and 1-4-grams, word unigrams.
    Stylometric,
    /// Character 1-3-grams.
    Char,
}

impl FeatureSet {
    fn config(self, min_doc_freq: usize) -> FeatureConfig {
        let base = match self {
            FeatureSet::Stylometric => FeatureConfig::stylometric(),
            FeatureSet::Char => FeatureConfig::char_ngrams(),
        };
        FeatureConfig { min_doc_freq, ..base }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct TrainDetector {
    /// Training data as `label<TAB>text` lines (label human or machine).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = FeatureSet::Stylometric)]
    pub features: FeatureSet,
    #[arg(long, default_value_t = 2)]
    pub min_doc_freq: usize,
    #[arg(long, default_value_t = 200)]
    pub rounds: usize,
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
    #[arg(long, env = "REVIEWFORGE_SEED", default_value_t = 0)]
    pub seed: u64,
}

impl TrainDetector {
    pub fn plan(&self) -> Plan {
        Plan {
            inputs: vec![self.input.clone()],
            outputs: vec![self.out.clone()],
            manifest: sidecar(&self.out, ".manifest.json"),
            seed: Some(self.seed),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 {
            return Err(UsageError("--depth must be at least 1".into()).into());
        }
        Ok(())
    }

    pub fn run(&self) -> Result<()> {
        let data = read_labeled_tsv(&self.input)?;
        let boost = BoostConfig {
            rounds: self.rounds,
            tree_depth: self.depth,
            seed: self.seed,
        };
        let det = Detector::train(&data, self.features.config(self.min_doc_freq), boost)?;
        if let Some(dir) = self.out.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        det.save(&self.out)?;
        let last = det.ensemble.history.last();
        println!(
            "{} trees over {} features; training error {:.4}",
            det.ensemble.len(),
            det.space.len(),
            last.map_or(f64::NAN, |h| h.training_error)
        );
        Ok(())
    }
}

// ------------------------------------------------------------ detect

#[derive(Debug, Args, Serialize)]
pub struct Detect {
    #[arg(long)]
    pub model: PathBuf,
    /// Reviews, one per line; a leading `label<TAB>` column is ignored.
    #[arg(long)]
    pub input: PathBuf,
    /// CSV with columns line,label,margin.
    #[arg(long, default_value = "predictions.csv")]
    pub out: PathBuf,
}

impl Detect {
    pub fn plan(&self) -> Plan {
        Plan {
            inputs: vec![self.model.clone(), self.input.clone()],
            outputs: vec![self.out.clone()],
            manifest: sidecar(&self.out, ".manifest.json"),
            seed: None,
        }
    }

    pub fn run(&self) -> Result<()> {
        let det = Detector::load(&self.model)?;
        let text = fs::read_to_string(&self.input).with_context(|| format!("reading {}", self.input.display()))?;
        let reviews: Vec<_> = text
            .lines()
            .map(|l| {
                let t = l.split_once('\t').map_or(l, |(_, t)| t);
                TokenSequence::from_cleaned(t)
            })
            .collect();
        let preds = det.classify_all(&reviews)?;
        let mut csv = String::from("line,label,margin\n");
        for (i, (label, margin)) in preds.iter().enumerate() {
            csv.push_str(&format!("{},{},{:.6}\n", i + 1, label, margin));
        }
        write_file(&self.out, csv.as_bytes())?;
        let machines = preds.iter().filter(|p| p.0 == Label::Machine).count();
        println!("{machines} of {} reviews classified as machine", preds.len());
        Ok(())
    }
}

// ------------------------------------------------------------ sweep

#[derive(Debug, Args, Serialize)]
pub struct Sweep {
    #[arg(long)]
    pub lm: PathBuf,
    #[arg(long)]
    pub contexts: PathBuf,
    /// Run directory; reviews/ and reports/ are created under it.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Sweep settings as JSON; missing fields take defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub reviews_per_cell: Option<usize>,
    #[arg(long)]
    pub grammar: Option<PathBuf>,
    #[arg(long, env = "REVIEWFORGE_SEED", default_value_t = 0)]
    pub seed: u64,
}

impl Sweep {
    fn config(&self) -> Result<SweepConfig> {
        let mut cfg: SweepConfig = match &self.config {
            Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
            None => SweepConfig::default(),
        };
        cfg.seed = self.seed;
        if let Some(n) = self.reviews_per_cell {
            cfg.reviews_per_cell = n;
        }
        Ok(cfg)
    }

    pub fn plan(&self) -> Plan {
        Plan {
            inputs: [
                vec![self.lm.clone(), self.contexts.clone()],
                opt_inputs(&[&self.config, &self.grammar]),
            ]
            .concat(),
            outputs: vec![self.out_dir.join("reviews"), self.out_dir.join("reports")],
            manifest: self.out_dir.join("manifest.json"),
            seed: Some(self.seed),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config()
            .and_then(|c| c.validate().map_err(Into::into))
            .map_err(|e| UsageError(format!("sweep config: {e}")).into())
    }

    pub fn run(&self) -> Result<()> {
        let cfg = self.config()?;
        let lm = NgramModel::load(&self.lm)?;
        let grammar = match &self.grammar {
            Some(p) => GrammarSet::load(p)?,
            None => GrammarSet::bundled(),
        };
        let contexts = read_contexts(&self.contexts)?;
        let result = run_sweep(&lm, &contexts, &cfg, &grammar)?;
        let run = RunDir::create(&self.out_dir)?;
        for (name, reviews) in &result.cells {
            run.write_reviews(name, reviews)?;
        }
        run.write_report("diversity.csv", &result.report.to_csv())?;
        println!("{:<12} {:>8} {:>8} {:>10}  top opening", "cell", "distinct", "share", "mean len");
        for c in &result.report.cells {
            println!(
                "{:<12} {:>8} {:>8.3} {:>10.2}  {}",
                c.cell, c.distinct_opening_bigrams, c.max_opening_bigram_share, c.mean_length, c.top_opening_bigram
            );
        }
        Ok(())
    }
}

// ------------------------------------------------------------ transfer

#[derive(Debug, Args, Serialize)]
pub struct Transfer {
    /// Human reviews, one per line.
    #[arg(long)]
    pub human: PathBuf,
    /// Machine category as NAME=FILE (repeat at least twice).
    #[arg(long = "category", required = true)]
    pub categories: Vec<String>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub train_per_class: usize,
    #[arg(long, default_value_t = 500)]
    pub test_per_class: usize,
    #[arg(long, default_value_t = 200)]
    pub rounds: usize,
    #[arg(long, value_enum, default_value_t = FeatureSet::Char)]
    pub features: FeatureSet,
    #[arg(long, env = "REVIEWFORGE_SEED", default_value_t = 0)]
    pub seed: u64,
}

impl Transfer {
    fn parsed(&self) -> Result<Vec<(String, PathBuf)>> {
        let cats = self
            .categories
            .iter()
            .map(|c| {
                c.split_once('=')
                    .map(|(n, p)| (n.to_owned(), PathBuf::from(p)))
                    .ok_or_else(|| UsageError(format!("--category `{c}` is not NAME=FILE")).into())
            })
            .collect::<Result<Vec<_>>>()?;
        if cats.len() < 2 {
            return Err(UsageError("transfer needs at least two --category values".into()).into());
        }
        Ok(cats)
    }

    pub fn plan(&self) -> Plan {
        let mut inputs = vec![self.human.clone()];
        inputs.extend(self.parsed().unwrap_or_default().into_iter().map(|c| c.1));
        Plan {
            inputs,
            outputs: vec![self.out_dir.join("reports")],
            manifest: self.out_dir.join("manifest.json"),
            seed: Some(self.seed),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.parsed().map(|_| ())
    }

    pub fn run(&self) -> Result<()> {
        let human = read_lines(&self.human)?;
        let cats = self
            .parsed()?
            .into_iter()
            .map(|(n, p)| Ok((n, read_lines(&p)?)))
            .collect::<Result<Vec<_>>>()?;
        let cfg = DetectorExperimentConfig {
            train_per_class: self.train_per_class,
            test_per_class: self.test_per_class,
            features: self.features.config(2),
            boost: BoostConfig {
                rounds: self.rounds,
                seed: self.seed,
                ..Default::default()
            },
            seed: self.seed,
            ..Default::default()
        };
        let matrix = transfer_experiment(&human, &cats, &cfg)?;
        let run = RunDir::create(&self.out_dir)?;
        run.write_report("transfer.csv", &matrix.to_csv())?;
        print!("{}", matrix.to_csv());
        Ok(())
    }
}

// ------------------------------------------------------------ report

#[derive(Debug, Args, Serialize)]
pub struct Report {
    #[arg(long)]
    pub model: PathBuf,
    /// Labeled test data as `label<TAB>text` lines.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Base name of the report files.
    #[arg(long, default_value = "detector")]
    pub name: String,
}

impl Report {
    pub fn plan(&self) -> Plan {
        Plan {
            inputs: vec![self.model.clone(), self.input.clone()],
            outputs: vec![self.out_dir.join("reports")],
            manifest: self.out_dir.join("manifest.json"),
            seed: None,
        }
    }

    pub fn run(&self) -> Result<()> {
        let detector = Detector::load(&self.model)?;
        let test: Vec<LabeledReview> = read_labeled_tsv(&self.input)?;
        let (report, histogram) = detector.evaluate(&test)?;
        let run = RunDir::create(&self.out_dir)?;
        run.write_report(&format!("{}.txt", self.name), &report.to_string())?;
        run.write_report(&format!("{}.csv", self.name), &report.to_csv())?;
        run.write_report(&format!("{}-histogram.csv", self.name), &histogram.to_csv())?;
        print!("{report}");
        println!();
        print!("{}", histogram.render(40));
        Ok(())
    }
}

// ------------------------------------------------------------ experiment

#[derive(Debug, Args, Serialize)]
pub struct Experiment {
    /// Experiment settings as JSON; missing fields take defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// JSON-lines records; without it a synthetic corpus is generated.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    /// Size of the synthetic corpus when no input is given.
    #[arg(long, default_value_t = 60_000)]
    pub records: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, env = "REVIEWFORGE_SEED", default_value_t = 0)]
    pub seed: u64,
}

impl Experiment {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        cfg.seed = self.seed;
        cfg.sweep.seed = self.seed;
        cfg.detector.seed = self.seed;
        Ok(cfg)
    }

    pub fn plan(&self) -> Plan {
        Plan {
            inputs: opt_inputs(&[&self.config, &self.input, &self.mapping]),
            outputs: ["reviews", "models", "reports"]
                .iter()
                .map(|d| self.out_dir.join(d))
                .collect(),
            manifest: self.out_dir.join("manifest.json"),
            seed: Some(self.seed),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config()
            .and_then(|c| c.sweep.validate().map_err(Into::into))
            .map_err(|e| UsageError(format!("experiment config: {e}")).into())
    }

    pub fn run(&self) -> Result<()> {
        let cfg = self.config()?;
        let records = match &self.input {
            Some(p) => {
                let mapping = match &self.mapping {
                    Some(m) => FieldMapping::load(m)?,
                    None => FieldMapping::default(),
                };
                read_jsonl(p, &mapping)?
            }
            None => synthetic_records(&SynthConfig {
                records: self.records,
                ..Default::default()
            }),
        };
        let run = RunDir::create(&self.out_dir)?;
        let s = run_experiment(&records, &cfg, &run)?;
        let mut out = std::io::stdout().lock();
        writeln!(out, "config {}", s.config_hash)?;
        writeln!(
            out,
            "kept {} of {} records, |V| = {}, validation perplexity {:.3}",
            s.ingest.kept, s.ingest.records, s.vocabulary_size, s.perplexity
        )?;
        for c in &s.diversity.cells {
            writeln!(
                out,
                "  {:<12} opening share {:.3} `{}`",
                c.cell, c.max_opening_bigram_share, c.top_opening_bigram
            )?;
        }
        writeln!(out, "\nhuman vs nmt-fake*\n{}", s.detector)?;
        write!(out, "transfer\n{}", s.transfer.to_csv())?;
        Ok(())
    }
}
