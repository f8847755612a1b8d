mod commands;
mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use commands::*;
use manifest::{sha256_file, FileHash, RunManifest};

/// Bad flag values or combinations; reported with exit code 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Review generation with penalty decoding, and boosted-tree detection of
/// machine-written reviews.
#[derive(Debug, Parser)]
#[command(name = "reviewforge", version)]
struct Cli {
    /// Worker threads for parallel stages (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Where to write the run manifest; defaults to a path next to the outputs.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic review corpus in JSON-lines form.
    SampleCorpus(SampleCorpus),
    /// Clean and filter records into aligned context/review files.
    Preprocess(Preprocess),
    /// Train the conditional n-gram language model.
    TrainLm(TrainLm),
    /// Generate reviews with penalty decoding and obfuscation.
    Generate(Generate),
    /// Inject typos and misspellings into existing reviews.
    Obfuscate(Obfuscate),
    /// Train a boosted-tree detector on labeled reviews.
    TrainDetector(TrainDetector),
    /// Classify reviews with a trained detector.
    Detect(Detect),
    /// Generate every (b, lambda) cell and report opening diversity.
    Sweep(Sweep),
    /// Train and evaluate detectors across machine-review categories.
    Transfer(Transfer),
    /// Evaluate a detector on labeled data and write the report files.
    Report(Report),
    /// Run the whole pipeline from records to reports.
    Experiment(Experiment),
    /// Re-run a recorded command and check its outputs are identical.
    Replay(Replay),
}

#[derive(Debug, Args, Serialize)]
struct Replay {
    /// Manifest written by an earlier run.
    #[arg(long = "from")]
    from: PathBuf,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let usage = err.chain().any(|e| {
        e.is::<UsageError>() || matches!(e.downcast_ref(), Some(reviewforge::Error::InvalidParameter { .. }))
    });
    if usage {
        1
    } else {
        2
    }
}

struct Prepared<'a> {
    name: &'static str,
    flags: serde_json::Value,
    plan: Plan,
    validate: Box<dyn Fn() -> Result<()> + 'a>,
    run: Box<dyn Fn() -> Result<()> + 'a>,
}

macro_rules! prepare {
    ($name:literal, $cmd:expr, validate) => {{
        let c = $cmd;
        Prepared {
            name: $name,
            flags: serde_json::to_value(c)?,
            plan: c.plan(),
            validate: Box::new(move || c.validate()),
            run: Box::new(move || c.run()),
        }
    }};
    ($name:literal, $cmd:expr) => {{
        let c = $cmd;
        Prepared {
            name: $name,
            flags: serde_json::to_value(c)?,
            plan: c.plan(),
            validate: Box::new(|| Ok(())),
            run: Box::new(move || c.run()),
        }
    }};
}

fn execute(argv: Vec<OsString>) -> Result<()> {
    let cli = Cli::try_parse_from(&argv).map_err(|e| anyhow::Error::new(ClapError(e)))?;
    if cli.jobs > 0 {
        // a second build in the same process (replay) is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global();
    }
    let p = match &cli.command {
        Command::SampleCorpus(c) => prepare!("sample-corpus", c),
        Command::Preprocess(c) => prepare!("preprocess", c),
        Command::TrainLm(c) => prepare!("train-lm", c, validate),
        Command::Generate(c) => prepare!("generate", c, validate),
        Command::Obfuscate(c) => prepare!("obfuscate", c, validate),
        Command::TrainDetector(c) => prepare!("train-detector", c, validate),
        Command::Detect(c) => prepare!("detect", c),
        Command::Sweep(c) => prepare!("sweep", c, validate),
        Command::Transfer(c) => prepare!("transfer", c, validate),
        Command::Report(c) => prepare!("report", c),
        Command::Experiment(c) => prepare!("experiment", c, validate),
        Command::Replay(r) => return replay(r),
    };
    (p.validate)()?;
    let manifest_path = cli.manifest.clone().unwrap_or_else(|| p.plan.manifest.clone());
    let mut manifest = RunManifest {
        tool: "reviewforge".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: p.name.into(),
        argv: argv.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
        flags: p.flags,
        seed: p.plan.seed,
        jobs: rayon::current_num_threads(),
        inputs: RunManifest::hash_inputs(&p.plan.inputs)?,
        outputs: p
            .plan
            .outputs
            .iter()
            .map(|o| FileHash {
                path: o.clone(),
                sha256: None,
            })
            .collect(),
    };
    manifest.write(&manifest_path)?;
    (p.run)()?;
    manifest.record_outputs(&p.plan.outputs, &manifest_path)?;
    manifest.write(&manifest_path)?;
    log::info!("manifest written to {}", manifest_path.display());
    Ok(())
}

fn replay(r: &Replay) -> Result<()> {
    let recorded = RunManifest::read(&r.from)?;
    for input in &recorded.inputs {
        let now = sha256_file(&input.path)?;
        if Some(&now) != input.sha256.as_ref() {
            bail!("input {} changed since the recorded run", input.path.display());
        }
    }
    let mut argv: Vec<OsString> = recorded.argv.iter().map(OsString::from).collect();
    if !argv.iter().any(|a| a == "--manifest") {
        // keep the original manifest intact for comparison
        argv.push("--manifest".into());
        argv.push(r.from.with_extension("replay.json").into());
    }
    execute(argv)?;
    let mut mismatched = Vec::new();
    for out in &recorded.outputs {
        let now = sha256_file(&out.path).ok();
        if now != out.sha256 {
            mismatched.push(out.path.display().to_string());
        }
    }
    if !mismatched.is_empty() {
        bail!("replay produced different outputs: {}", mismatched.join(", "));
    }
    println!("replay identical: {} outputs match", recorded.outputs.len());
    Ok(())
}

#[derive(Debug)]
struct ClapError(clap::Error);

impl std::fmt::Display for ClapError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl std::error::Error for ClapError {}

fn main() -> ExitCode {
    let argv: Vec<OsString> = std::env::args_os().collect();
    let verbose = argv.iter().filter(|a| *a == "-v" || *a == "--verbose").count()
        + argv.iter().filter(|a| *a == "-vv").count() * 2;
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match execute(argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(ClapError(c)) = e.downcast_ref::<ClapError>() {
                let _ = c.print();
                return match c.kind() {
                    ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                    _ => ExitCode::from(1),
                };
            }
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
