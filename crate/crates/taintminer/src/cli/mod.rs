//! Command line front end.
//!
//! Every subcommand is a thin wrapper over the library modules, and the
//! `pipeline` command chains the very same helpers the individual commands
//! use, reading each stage's artifact back from disk. Running `pipeline`
//! therefore produces byte-identical features.csv and eval.json to running
//! the stages by hand with the same flags.
//!
//! Exit codes: 0 on success, 1 on usage or fatal errors, 2 when `--strict`
//! is set and some corpus files had to be skipped.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::flowsminer::{mine_with, MineOptions, MinerReport};
use crate::lexer::{bag_of_words, split_methods, tokenize, BagOfWords};
use crate::ml::{self, ModelSet, TrainParams, CLASSIFIER_NAMES};
use crate::mutgen;
use crate::preprocessor::{normalize, NormalizedSource, RawSource};
use crate::taintmodel::{FlowCategory, Label, SinkSet};
use crate::vectorizer::{assemble, FeatureMatrix, FeatureRow, DEFAULT_MIN_APPS};

/// Environment variable consulted for a sink list file when `--sinks` is
/// not given.
pub const SINKS_ENV_VAR: &str = "TAINTMINER_SINKS";

#[derive(Parser)]
#[command(
    name = "taintminer",
    version,
    about = "Mines tainted flows from SmartThings Groovy apps and classifies leak risk"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rewrite raw Groovy into the one-case-per-line layout
    Preprocess(PreprocessArgs),
    /// Emit each app's token bag as JSON, one object per line
    Bow(BowArgs),
    /// Mine tainted flows and report them as JSON
    Mine(MineArgs),
    /// Build the corpus feature matrix as CSV
    Vectorize(VectorizeArgs),
    /// Fit the four classifiers on a feature matrix and save them
    Train(TrainArgs),
    /// Score the stored holdout split and report the metrics
    Evaluate(EvaluateArgs),
    /// Score new apps or feature rows with a saved model
    Predict(PredictArgs),
    /// Tabulate sink usage across a corpus
    Stats(StatsArgs),
    /// Grow a labeled mutant corpus from seed apps
    Mutgen(MutgenArgs),
    /// Run preprocess, mine, vectorize, train, and evaluate in one go
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct PreprocessArgs {
    /// A .groovy file or a directory of apps
    input: PathBuf,
    /// Directory to write normalized files into, mirroring the input layout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Exit 2 if any file cannot be processed
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct BowArgs {
    input: PathBuf,
    /// File for the JSON lines; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct MineArgs {
    input: PathBuf,
    /// Sink list file, one name per line; falls back to TAINTMINER_SINKS,
    /// then to the built-in eight
    #[arg(long)]
    sinks: Option<PathBuf>,
    /// Chase extended sinks through further forwarding hops
    #[arg(long)]
    transitive: bool,
    /// File for the JSON report array; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct VectorizeArgs {
    input: PathBuf,
    #[arg(long)]
    sinks: Option<PathBuf>,
    /// Keep only tokens present in at least this many apps
    #[arg(long, default_value_t = DEFAULT_MIN_APPS)]
    min_apps: usize,
    /// Feature blocks to fill in; the deselected block is written as zeros
    #[arg(long, default_value = "bow+flows")]
    features: FeaturesChoice,
    #[arg(long)]
    transitive: bool,
    /// File for the CSV; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct TrainArgs {
    /// Feature matrix CSV produced by `vectorize`
    features: PathBuf,
    /// Fraction of each class used for training
    #[arg(long, default_value_t = ml::DEFAULT_TRAIN_FRACTION)]
    split: f64,
    #[arg(long, default_value_t = ml::DEFAULT_SEED)]
    seed: u64,
    /// Neighbors consulted by the kNN model
    #[arg(long, default_value_t = ml::knn::DEFAULT_K)]
    k: usize,
    /// Where to save the trained models
    #[arg(long, default_value = "model.json")]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// The same feature matrix CSV the models were trained on
    features: PathBuf,
    #[arg(long, default_value = "model.json")]
    model_file: PathBuf,
    /// Restrict the report to one classifier
    #[arg(long, default_value = "all")]
    model: ModelChoice,
    /// File for the metrics JSON; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    /// Apps to score: a feature matrix CSV, a .groovy file, or a directory
    input: PathBuf,
    #[arg(long, default_value = "model.json")]
    model_file: PathBuf,
    #[arg(long, default_value = "all")]
    model: ModelChoice,
    /// Sink list used when the input is raw apps rather than a CSV
    #[arg(long)]
    sinks: Option<PathBuf>,
    #[arg(long)]
    transitive: bool,
    /// File for the prediction CSV; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct StatsArgs {
    input: PathBuf,
    #[arg(long)]
    sinks: Option<PathBuf>,
    /// File for the CSV table; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct MutgenArgs {
    /// Directory of benign seed apps; the six embedded seeds when omitted
    seed_dir: Option<PathBuf>,
    /// Mutants grown from each seed
    #[arg(long, default_value_t = mutgen::DEFAULT_PER_SEED)]
    per_seed: usize,
    /// Share of vulnerable mutants per seed
    #[arg(long, default_value_t = mutgen::DEFAULT_VULN_RATIO)]
    vuln_ratio: f64,
    #[arg(long, default_value_t = ml::DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    sinks: Option<PathBuf>,
    /// Directory for the mutant files and manifest.csv
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PipelineArgs {
    /// Labeled corpus: directory layout or manifest.csv supplies the labels
    input: PathBuf,
    /// Directory for all artifacts
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    sinks: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MIN_APPS)]
    min_apps: usize,
    #[arg(long, default_value = "bow+flows")]
    features: FeaturesChoice,
    #[arg(long, default_value_t = ml::DEFAULT_TRAIN_FRACTION)]
    split: f64,
    #[arg(long, default_value_t = ml::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = ml::knn::DEFAULT_K)]
    k: usize,
    #[arg(long)]
    transitive: bool,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    strict: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FeaturesChoice {
    /// Token counts only; flow columns zeroed
    Bow,
    /// Flow counts only; token columns zeroed
    Flows,
    /// Token and flow counts together
    #[value(name = "bow+flows")]
    BowFlows,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelChoice {
    Logreg,
    Nb,
    Knn,
    Tree,
    All,
}

impl ModelChoice {
    /// The stored model name, or None for all of them.
    fn internal(self) -> Option<&'static str> {
        match self {
            ModelChoice::Logreg => Some("logreg"),
            ModelChoice::Nb => Some("naive_bayes"),
            ModelChoice::Knn => Some("knn"),
            ModelChoice::Tree => Some("decision_tree"),
            ModelChoice::All => None,
        }
    }
}

/// Parses real process arguments and runs; returns the process exit code.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

/// Same as [`run`] but over explicit arguments, first one the program name.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(
        env_logger::Env::default().default_filter_or("warn"),
    )
    .try_init();

    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Preprocess(a) => cmd_preprocess(a),
        Command::Bow(a) => cmd_bow(a),
        Command::Mine(a) => cmd_mine(a),
        Command::Vectorize(a) => cmd_vectorize(a),
        Command::Train(a) => cmd_train(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Mutgen(a) => cmd_mutgen(a),
        Command::Pipeline(a) => cmd_pipeline(a),
    }
}

/// One app of a corpus before reading: where it lives and what it is called.
struct CorpusEntry {
    app: String,
    path: PathBuf,
    /// Path relative to the corpus root, for layout-mirroring output.
    rel: PathBuf,
    label: Option<Label>,
}

/// An app read and normalized.
struct LoadedApp {
    entry: CorpusEntry,
    norm: NormalizedSource,
}

fn app_name_of(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_owned)
        .ok_or_else(|| anyhow!("cannot derive an app name from {}", path.display()))
}

fn parse_label(text: &str) -> Result<Option<Label>> {
    match text.trim() {
        "vulnerable" => Ok(Some(Label::Vulnerable)),
        "non-vulnerable" => Ok(Some(Label::NonVulnerable)),
        "" | "unknown" => Ok(None),
        other => bail!("unrecognized label {other:?}; expected vulnerable, non-vulnerable, or unknown"),
    }
}

/// Finds the corpus files and their labels. A `manifest.csv`
/// (`file,label,...`) wins over directory layout; without one, files under a
/// `vulnerable/` or `non-vulnerable/` directory get that label.
fn load_corpus(input: &Path) -> Result<Vec<CorpusEntry>> {
    let mut entries = Vec::new();
    if input.is_file() {
        entries.push(CorpusEntry {
            app: app_name_of(input)?,
            path: input.to_path_buf(),
            rel: input
                .file_name()
                .map(PathBuf::from)
                .unwrap_or_else(|| input.to_path_buf()),
            label: None,
        });
        return Ok(entries);
    }
    if !input.is_dir() {
        bail!("{} is neither a file nor a directory", input.display());
    }

    let manifest = input.join("manifest.csv");
    if manifest.is_file() {
        let mut reader = csv::ReaderBuilder::new()
            .flexible(true)
            .from_path(&manifest)
            .with_context(|| format!("reading {}", manifest.display()))?;
        let headers = reader.headers()?.clone();
        if headers.get(0) != Some("file") || headers.get(1) != Some("label") {
            bail!(
                "{}: header must start with file,label (found {:?})",
                manifest.display(),
                headers.iter().collect::<Vec<_>>()
            );
        }
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let file = record
                .get(0)
                .filter(|f| !f.is_empty())
                .ok_or_else(|| anyhow!("{}: row {} has no file", manifest.display(), i + 2))?;
            let rel = PathBuf::from(file);
            let path = input.join(&rel);
            entries.push(CorpusEntry {
                app: app_name_of(&path)?,
                path,
                rel,
                label: parse_label(record.get(1).unwrap_or(""))
                    .with_context(|| format!("{}: row {}", manifest.display(), i + 2))?,
            });
        }
    } else {
        for item in walkdir::WalkDir::new(input).sort_by_file_name() {
            let item = item?;
            if !item.file_type().is_file()
                || item.path().extension().and_then(|e| e.to_str()) != Some("groovy")
            {
                continue;
            }
            let rel = item
                .path()
                .strip_prefix(input)
                .expect("walked path must sit under its root")
                .to_path_buf();
            let label = rel.parent().and_then(|dirs| {
                dirs.components().find_map(|c| match c.as_os_str().to_str() {
                    Some("vulnerable") => Some(Label::Vulnerable),
                    Some("non-vulnerable") => Some(Label::NonVulnerable),
                    _ => None,
                })
            });
            entries.push(CorpusEntry {
                app: app_name_of(item.path())?,
                path: item.path().to_path_buf(),
                rel,
                label,
            });
        }
    }

    entries.sort_by(|a, b| a.app.cmp(&b.app));
    for pair in entries.windows(2) {
        if pair[0].app == pair[1].app {
            bail!(
                "app name {} is ambiguous: {} and {}",
                pair[0].app,
                pair[0].path.display(),
                pair[1].path.display()
            );
        }
    }
    if entries.is_empty() {
        bail!("no .groovy files found under {}", input.display());
    }
    Ok(entries)
}

/// Runs `f` on a thread pool of the requested width, or inline on the
/// default pool.
fn with_jobs<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("building a thread pool")
            .install(f),
        None => f(),
    }
}

/// Reads and normalizes every corpus file, in parallel. Files that cannot be
/// read or normalized become warnings, not errors; the survivors come back
/// sorted by app name.
fn normalize_corpus(
    entries: Vec<CorpusEntry>,
    jobs: Option<usize>,
) -> (Vec<LoadedApp>, Vec<String>) {
    let outcomes: Vec<(CorpusEntry, Result<NormalizedSource, String>)> = with_jobs(jobs, || {
        entries
            .into_par_iter()
            .map(|entry| {
                let outcome = fs::read_to_string(&entry.path)
                    .map_err(|e| format!("{}: {e}", entry.path.display()))
                    .and_then(|text| {
                        normalize(&RawSource::from_text(entry.app.clone(), &text))
                            .map_err(|e| format!("{}: {e}", entry.path.display()))
                    });
                (entry, outcome)
            })
            .collect()
    });

    let mut apps = Vec::new();
    let mut failed = Vec::new();
    for (entry, outcome) in outcomes {
        match outcome {
            Ok(norm) => apps.push(LoadedApp { entry, norm }),
            Err(msg) => failed.push(msg),
        }
    }
    apps.sort_by(|a, b| a.entry.app.cmp(&b.entry.app));
    (apps, failed)
}

/// Prints skip warnings; under `--strict` any skip turns into exit code 2.
fn finish(failed: &[String], strict: bool) -> Result<i32> {
    for msg in failed {
        eprintln!("warning: skipped {msg}");
    }
    Ok(if strict && !failed.is_empty() { 2 } else { 0 })
}

fn load_apps(input: &Path, jobs: Option<usize>) -> Result<(Vec<LoadedApp>, Vec<String>)> {
    let entries = load_corpus(input)?;
    let (apps, failed) = normalize_corpus(entries, jobs);
    if apps.is_empty() {
        bail!("no app could be preprocessed; first failure: {}", failed[0]);
    }
    Ok((apps, failed))
}

fn resolve_sinks(flag: &Option<PathBuf>) -> Result<SinkSet> {
    if let Some(path) = flag {
        return SinkSet::load(path)
            .with_context(|| format!("loading sinks from {}", path.display()));
    }
    if let Some(path) = std::env::var_os(SINKS_ENV_VAR) {
        let path = PathBuf::from(path);
        return SinkSet::load(&path)
            .with_context(|| format!("loading sinks from {SINKS_ENV_VAR}={}", path.display()));
    }
    Ok(SinkSet::default_set())
}

fn write_output(out: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent)?;
                }
            }
            fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
        }
        None => io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn render_normalized(norm: &NormalizedSource) -> String {
    let mut text = norm.lines.join("\n");
    text.push('\n');
    text
}

fn write_normalized_tree(dir: &Path, apps: &[LoadedApp]) -> Result<()> {
    for app in apps {
        let path = dir.join(&app.entry.rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, render_normalized(&app.norm))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn bag_for(norm: &NormalizedSource) -> BagOfWords {
    let split = split_methods(&tokenize(norm));
    bag_of_words(&split.methods)
}

fn mine_corpus(
    apps: &[LoadedApp],
    sinks: &SinkSet,
    transitive: bool,
    jobs: Option<usize>,
) -> Vec<MinerReport> {
    let opts = MineOptions { transitive };
    with_jobs(jobs, || {
        apps.par_iter().map(|a| mine_with(&a.norm, sinks, &opts)).collect()
    })
}

fn flows_json(reports: &[MinerReport]) -> Result<String> {
    let mut json = serde_json::to_string_pretty(reports)?;
    json.push('\n');
    Ok(json)
}

/// Builds the corpus feature matrix, attaching whatever labels the corpus
/// carries and zeroing the deselected feature block.
fn build_matrix(
    apps: &[LoadedApp],
    reports: &[MinerReport],
    min_apps: usize,
    features: FeaturesChoice,
) -> Result<FeatureMatrix> {
    let bags: BTreeMap<String, BagOfWords> = apps
        .iter()
        .map(|a| (a.entry.app.clone(), bag_for(&a.norm)))
        .collect();
    let mined: BTreeMap<String, MinerReport> = apps
        .iter()
        .zip(reports)
        .map(|(a, r)| (a.entry.app.clone(), r.clone()))
        .collect();
    let mut matrix = assemble(&bags, &mined, None, min_apps)?;

    let labels: BTreeMap<&str, Option<Label>> = apps
        .iter()
        .map(|a| (a.entry.app.as_str(), a.entry.label))
        .collect();
    for row in &mut matrix.rows {
        row.label = labels.get(row.app.as_str()).copied().flatten();
    }

    let token_cols = matrix.columns.len() - FlowCategory::ALL.len();
    match features {
        FeaturesChoice::BowFlows => {}
        FeaturesChoice::Bow => {
            for row in &mut matrix.rows {
                for v in &mut row.values[token_cols..] {
                    *v = 0.0;
                }
            }
        }
        FeaturesChoice::Flows => {
            for row in &mut matrix.rows {
                for v in &mut row.values[..token_cols] {
                    *v = 0.0;
                }
            }
        }
    }
    Ok(matrix)
}

fn features_csv(matrix: &FeatureMatrix) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    matrix.to_csv(&mut buf)?;
    Ok(buf)
}

fn read_matrix(path: &Path) -> Result<FeatureMatrix> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(FeatureMatrix::from_csv(io::BufReader::new(file))?)
}

/// The eval.json entry shape: confusion counts and metrics side by side.
#[derive(Serialize)]
struct FlatMetrics {
    tp: u64,
    tn: u64,
    fp: u64,
    #[serde(rename = "fn")]
    fn_: u64,
    accuracy: f64,
    f1: f64,
    mcc: f64,
    auc: f64,
}

fn flatten_report(
    report: &ml::EvalReport,
    only: Option<&str>,
) -> BTreeMap<String, FlatMetrics> {
    report
        .models
        .iter()
        .filter(|(name, _)| only.is_none_or(|o| o == name.as_str()))
        .map(|(name, m)| {
            (
                name.clone(),
                FlatMetrics {
                    tp: m.confusion.tp,
                    tn: m.confusion.tn,
                    fp: m.confusion.fp,
                    fn_: m.confusion.fn_,
                    accuracy: m.accuracy,
                    f1: m.f1,
                    mcc: m.mcc,
                    auc: m.auc,
                },
            )
        })
        .collect()
}

fn eval_json(report: &ml::EvalReport, only: Option<&str>) -> Result<String> {
    let mut json = serde_json::to_string_pretty(&flatten_report(report, only))?;
    json.push('\n');
    Ok(json)
}

fn print_metric_table(report: &ml::EvalReport, only: Option<&str>) {
    eprintln!(
        "holdout: {} train / {} test rows (seed {}, train fraction {:.2})",
        report.n_train, report.n_test, report.seed, report.train_fraction
    );
    eprintln!(
        "{:<14} {:>9} {:>9} {:>9} {:>9} {:>5} {:>5} {:>5} {:>5}",
        "classifier", "accuracy", "f1", "mcc", "auc", "tp", "fp", "tn", "fn"
    );
    for (name, m) in &report.models {
        if only.is_some_and(|o| o != name.as_str()) {
            continue;
        }
        eprintln!(
            "{:<14} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>5} {:>5} {:>5} {:>5}",
            name,
            m.accuracy,
            m.f1,
            m.mcc,
            m.auc,
            m.confusion.tp,
            m.confusion.fp,
            m.confusion.tn,
            m.confusion.fn_
        );
    }
}

fn cmd_preprocess(a: PreprocessArgs) -> Result<i32> {
    let entries = load_corpus(&a.input)?;
    let single = entries.len() == 1;
    let (apps, failed) = normalize_corpus(entries, a.jobs);
    if apps.is_empty() {
        bail!("no app could be preprocessed; first failure: {}", failed[0]);
    }
    match &a.out {
        Some(dir) => {
            write_normalized_tree(dir, &apps)?;
            eprintln!("wrote {} normalized file(s) under {}", apps.len(), dir.display());
        }
        None if single => {
            io::stdout().write_all(render_normalized(&apps[0].norm).as_bytes())?;
        }
        None => bail!("several files normalize at once only with --out <dir>"),
    }
    finish(&failed, a.strict)
}

fn cmd_bow(a: BowArgs) -> Result<i32> {
    #[derive(Serialize)]
    struct BowLine<'a> {
        app: &'a str,
        tokens: &'a BagOfWords,
    }

    let (apps, failed) = load_apps(&a.input, a.jobs)?;
    let mut out = String::new();
    for app in &apps {
        let bag = bag_for(&app.norm);
        out.push_str(&serde_json::to_string(&BowLine {
            app: &app.entry.app,
            tokens: &bag,
        })?);
        out.push('\n');
    }
    write_output(&a.out, out.as_bytes())?;
    finish(&failed, a.strict)
}

fn cmd_mine(a: MineArgs) -> Result<i32> {
    let sinks = resolve_sinks(&a.sinks)?;
    let (apps, failed) = load_apps(&a.input, a.jobs)?;

    let started = Instant::now();
    let reports = mine_corpus(&apps, &sinks, a.transitive, a.jobs);
    let elapsed = started.elapsed().as_secs_f64();

    write_output(&a.out, flows_json(&reports)?.as_bytes())?;

    let mut totals = [0u64; 6];
    for report in &reports {
        for (total, count) in totals.iter_mut().zip(report.flow_counts()) {
            *total += count;
        }
    }
    eprintln!("flows by category:");
    for (category, total) in FlowCategory::ALL.iter().zip(totals) {
        eprintln!("  {:<8} {total}", category.label());
    }
    eprintln!(
        "mined {} app(s) in {:.2} s ({:.1} apps/s)",
        reports.len(),
        elapsed,
        reports.len() as f64 / elapsed.max(1e-9)
    );
    finish(&failed, a.strict)
}

fn cmd_vectorize(a: VectorizeArgs) -> Result<i32> {
    let sinks = resolve_sinks(&a.sinks)?;
    let (apps, failed) = load_apps(&a.input, a.jobs)?;
    let reports = mine_corpus(&apps, &sinks, a.transitive, a.jobs);
    let matrix = build_matrix(&apps, &reports, a.min_apps, a.features)?;
    write_output(&a.out, &features_csv(&matrix)?)?;
    eprintln!("{} app(s), {} feature column(s)", matrix.rows.len(), matrix.width());
    finish(&failed, a.strict)
}

fn cmd_train(a: TrainArgs) -> Result<i32> {
    let matrix = read_matrix(&a.features)?;
    let params = TrainParams {
        seed: a.seed,
        train_fraction: a.split,
        knn_k: a.k,
        ..TrainParams::default()
    };
    let models = ml::train(&matrix, &params)?;
    models.save(&a.out)?;
    eprintln!(
        "trained {} classifiers on {} row(s) x {} column(s); wrote {}",
        CLASSIFIER_NAMES.len(),
        matrix.rows.len(),
        matrix.width(),
        a.out.display()
    );
    Ok(0)
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<i32> {
    let matrix = read_matrix(&a.features)?;
    let models = ModelSet::load(&a.model_file)?;
    let report = ml::evaluate(&models, &matrix)?;
    write_output(&a.out, eval_json(&report, a.model.internal())?.as_bytes())?;
    print_metric_table(&report, a.model.internal());
    Ok(0)
}

/// Rebuilds feature rows for new apps against a model's stored columns:
/// stored tokens count as usual, unknown tokens drop, flow counts fill the
/// six tail columns.
fn rows_against_columns(
    columns: &[String],
    apps: &[LoadedApp],
    reports: &[MinerReport],
) -> FeatureMatrix {
    let token_cols = columns.len() - FlowCategory::ALL.len();
    let rows = apps
        .iter()
        .zip(reports)
        .map(|(app, report)| {
            let bag = bag_for(&app.norm);
            let mut values = Vec::with_capacity(columns.len());
            for token in &columns[..token_cols] {
                values.push(bag.get(token).copied().unwrap_or(0) as f64);
            }
            for count in report.flow_counts() {
                values.push(count as f64);
            }
            FeatureRow {
                app: app.entry.app.clone(),
                label: app.entry.label,
                values,
            }
        })
        .collect();
    FeatureMatrix { columns: columns.to_vec(), rows }
}

fn cmd_predict(a: PredictArgs) -> Result<i32> {
    let models = ModelSet::load(&a.model_file)?;

    let is_csv = a.input.is_file()
        && a.input.extension().and_then(|e| e.to_str()) == Some("csv");
    let (matrix, failed) = if is_csv {
        (read_matrix(&a.input)?, Vec::new())
    } else {
        let sinks = resolve_sinks(&a.sinks)?;
        let (apps, failed) = load_apps(&a.input, a.jobs)?;
        let reports = mine_corpus(&apps, &sinks, a.transitive, a.jobs);
        (rows_against_columns(&models.columns, &apps, &reports), failed)
    };

    let chosen: Vec<&str> = match a.model.internal() {
        Some(one) => vec![one],
        None => CLASSIFIER_NAMES.to_vec(),
    };
    let mut rows: Vec<(String, &str, f64, Label)> = Vec::new();
    for name in &chosen {
        for p in ml::predict(&models, &matrix, name)? {
            rows.push((p.app, name, p.score, p.label));
        }
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(b.1)));

    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["app", "classifier", "score", "label"])?;
    for (app, classifier, score, label) in &rows {
        writer.write_record([
            app.as_str(),
            classifier,
            &format!("{score:.6}"),
            &label.to_string(),
        ])?;
    }
    let bytes = writer.into_inner().map_err(|e| anyhow!("{e}"))?;
    write_output(&a.out, &bytes)?;
    eprintln!("scored {} app(s) with {} classifier(s)", matrix.rows.len(), chosen.len());
    finish(&failed, a.strict)
}

fn cmd_stats(a: StatsArgs) -> Result<i32> {
    let sinks = resolve_sinks(&a.sinks)?;
    let (apps, failed) = load_apps(&a.input, a.jobs)?;
    let bags: Vec<(Option<Label>, BagOfWords)> = apps
        .iter()
        .map(|app| (app.entry.label, bag_for(&app.norm)))
        .collect();

    let mut out = String::from("sink,apps,vulnerable,non-vulnerable,unknown\n");
    for sink in sinks.iter() {
        let mut total = 0u64;
        let mut by_label = [0u64; 3];
        for (label, bag) in &bags {
            if bag.contains_key(sink) {
                total += 1;
                let slot = match label {
                    Some(Label::Vulnerable) => 0,
                    Some(Label::NonVulnerable) => 1,
                    None => 2,
                };
                by_label[slot] += 1;
            }
        }
        if total > 0 {
            out.push_str(&format!(
                "{sink},{total},{},{},{}\n",
                by_label[0], by_label[1], by_label[2]
            ));
        }
    }
    write_output(&a.out, out.as_bytes())?;
    finish(&failed, a.strict)
}

fn cmd_mutgen(a: MutgenArgs) -> Result<i32> {
    let sinks = resolve_sinks(&a.sinks)?;
    let seeds = match &a.seed_dir {
        None => mutgen::builtin_seed_texts()
            .into_iter()
            .map(|(slug, text)| mutgen::derive_seed(slug, text, &sinks))
            .collect::<Result<Vec<_>, _>>()?,
        Some(dir) => {
            let entries = load_corpus(dir)?;
            entries
                .iter()
                .map(|entry| {
                    let text = fs::read_to_string(&entry.path)
                        .with_context(|| format!("reading {}", entry.path.display()))?;
                    Ok(mutgen::derive_seed(entry.app.clone(), text, &sinks)?)
                })
                .collect::<Result<Vec<_>>>()?
        }
    };

    let params = mutgen::GenParams {
        per_seed: a.per_seed,
        vuln_ratio: a.vuln_ratio,
        seed: a.seed,
        sinks,
    };
    let corpus = mutgen::generate_corpus(&seeds, &params)?;
    let manifest = mutgen::write_corpus(&a.out, &corpus)?;

    let vulnerable = corpus.iter().filter(|m| m.label == Label::Vulnerable).count();
    eprintln!(
        "wrote {} mutant(s) from {} seed(s) under {} ({} vulnerable, {} non-vulnerable); manifest: {}",
        corpus.len(),
        seeds.len(),
        a.out.display(),
        vulnerable,
        corpus.len() - vulnerable,
        manifest.display()
    );
    Ok(0)
}

fn cmd_pipeline(a: PipelineArgs) -> Result<i32> {
    fs::create_dir_all(&a.out)?;
    let sinks = resolve_sinks(&a.sinks)?;
    let (apps, failed) = load_apps(&a.input, a.jobs)?;

    write_normalized_tree(&a.out.join("normalized"), &apps)?;

    let reports = mine_corpus(&apps, &sinks, a.transitive, a.jobs);
    fs::write(a.out.join("flows.json"), flows_json(&reports)?)?;

    let matrix = build_matrix(&apps, &reports, a.min_apps, a.features)?;
    let features_path = a.out.join("features.csv");
    fs::write(&features_path, features_csv(&matrix)?)?;

    let matrix = read_matrix(&features_path)?;
    let params = TrainParams {
        seed: a.seed,
        train_fraction: a.split,
        knn_k: a.k,
        ..TrainParams::default()
    };
    let models = ml::train(&matrix, &params)?;
    let model_path = a.out.join("model.json");
    models.save(&model_path)?;

    let models = ModelSet::load(&model_path)?;
    let report = ml::evaluate(&models, &matrix)?;
    fs::write(a.out.join("eval.json"), eval_json(&report, None)?)?;

    print_metric_table(&report, None);
    eprintln!("pipeline artifacts under {}", a.out.display());
    finish(&failed, a.strict)
}
