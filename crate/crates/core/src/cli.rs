//! The `mw2v` command-line front end.
//!
//! `train` and `eval` can store their fully resolved settings as a
//! [`RunConfig`] JSON file (`--save-config`) and replay one (`--config`).
//! Settings resolve as: command-line flags, then `MW2V_SEED`, then the
//! config file, then built-in defaults.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::corpus::{build_slice_vocab, load_corpora, merge_global_vocab, NegativeRatio, SliceId};
use crate::error::{Error, Result};
use crate::eval::{
    build_triplets, cdf_csv, cosine_similarity_report, distance_histogram, evaluate_clustering, histogram_csv,
    identity_baseline, mp_at_k, mrr, nearest_neighbors, read_alignment, read_annotations, read_triplets,
    track_csv, track_neighbors, write_reports, ClusteringOptions, ComposedEmbeddings, MetricReport,
    PopularityScope, RetrievalOptions, TripletOptions, MRR_DEPTH, STABLE_COSINE,
};
use crate::model::{
    load_model, read_embeddings, save_model, train, write_json, write_tsv_dir, ExportFormat, TrainingConfig,
    FORMAT_VERSION,
};

pub const SEED_ENV: &str = "MW2V_SEED";

#[derive(Parser, Debug)]
#[command(name = "mw2v", version, about = "Multi-source word embeddings with per-slice drift")]
pub struct Cli {
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build per-slice and global vocabularies and write them as TSV.
    BuildVocab(BuildVocabArgs),
    /// Train a model and write it with a JSON training log.
    Train(TrainArgs),
    /// Print the nearest neighbours of a word's slice vector.
    Neighbors(NeighborsArgs),
    /// Compute evaluation metrics and write JSON/CSV reports.
    Eval(EvalArgs),
    /// Write composed vectors as text.
    Export(ExportArgs),
    /// Print a model's header and configuration.
    Inspect(InspectArgs),
}

/// A plain-text slice file given as `ID=PATH`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceFile {
    pub slice: SliceId,
    pub path: PathBuf,
}

impl FromStr for SliceFile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (id, path) = s
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("expected ID=PATH, got {s:?}")))?;
        Ok(SliceFile {
            slice: SliceId::new(id)?,
            path: path.into(),
        })
    }
}

#[derive(Args, Debug, Clone, Default)]
struct CorpusArgs {
    /// JSON-lines corpus, one {"slice": ..., "text": ...} document per line. Repeatable.
    #[arg(long = "corpus", value_name = "FILE")]
    corpus: Vec<PathBuf>,
    /// Plain-text slice file with one document per line, as ID=PATH. Repeatable.
    #[arg(long = "slice-file", value_name = "ID=PATH")]
    slice_files: Vec<SliceFile>,
}

#[derive(Args, Debug)]
struct BuildVocabArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Maximum vocabulary size per slice.
    #[arg(long, default_value_t = 20_000)]
    slice_vocab: usize,
    /// Output directory for global.tsv and one <slice>.tsv per slice.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Replay a stored run configuration.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Store the resolved run configuration.
    #[arg(long, value_name = "FILE")]
    save_config: Option<PathBuf>,
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Model output path.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Training log (JSON) output path.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Embedding dimension [default: 48]
    #[arg(long)]
    dim: Option<usize>,
    /// Context window half-width c [default: 4]
    #[arg(long)]
    window: Option<usize>,
    /// Drift penalty lambda [default: 1e-9]
    #[arg(long)]
    lambda: Option<f64>,
    /// Also penalize output-side drift [default: false]
    #[arg(long)]
    regularize_output: Option<bool>,
    /// Negatives per positive, as N/M or K [default: 3/4]
    #[arg(long)]
    neg_ratio: Option<NegativeRatio>,
    /// Subsampling factor t, or "none" [default: 1e-5]
    #[arg(long, value_parser = parse_subsample)]
    subsample: Option<Subsample>,
    /// Maximum vocabulary size per slice [default: 20000]
    #[arg(long)]
    slice_vocab: Option<usize>,
    /// Passes over the corpus [default: 5]
    #[arg(long)]
    epochs: Option<usize>,
    /// Positive pairs per step [default: 512]
    #[arg(long)]
    batch_size: Option<usize>,
    /// Lowest learning rate of the cycle [default: 1e-4]
    #[arg(long)]
    base_lr: Option<f64>,
    /// Highest learning rate of the cycle [default: 1e-2]
    #[arg(long)]
    max_lr: Option<f64>,
    /// Steps per learning-rate cycle [default: 2000]
    #[arg(long)]
    cycle_steps: Option<u64>,
    /// Central tables start uniform in [-s/d, s/d] [default: 0.5]
    #[arg(long)]
    init_scale: Option<f64>,
    /// Random seed; MW2V_SEED overrides the config file [default: 1]
    #[arg(long)]
    seed: Option<u64>,
    /// Single-worker, bit-reproducible training [default: true]
    #[arg(long)]
    deterministic: Option<bool>,
    /// Worker threads when not deterministic [default: 1]
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, Debug)]
struct Subsample(Option<f64>);

fn parse_subsample(s: &str) -> std::result::Result<Subsample, String> {
    if s.eq_ignore_ascii_case("none") {
        return Ok(Subsample(None));
    }
    s.parse::<f64>().map(|t| Subsample(Some(t))).map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
struct NeighborsArgs {
    /// Binary model, TSV export directory or JSON export.
    #[arg(long)]
    model: PathBuf,
    /// Slice of the query word.
    #[arg(long)]
    slice: SliceId,
    #[arg(long)]
    word: String,
    /// Slice to search [default: the query slice]
    #[arg(long)]
    target_slice: Option<SliceId>,
    #[arg(long, short, default_value_t = 8)]
    k: usize,
    /// Leave the query word out of the candidates.
    #[arg(long)]
    exclude_query: bool,
    /// Also write the table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// NMI between k-means clusters and section labels.
    #[default]
    Nmi,
    /// Pairwise F-beta between k-means clusters and section labels.
    Fbeta,
    /// MP@k and MRR over an alignment test.
    Alignment,
    /// Cosine of slice vectors to the average representation.
    Cdf,
    /// Distances to a base slice.
    Histogram,
    /// Top-k neighbours of a fixed vector across slices.
    Track,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Replay a stored run configuration.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Store the resolved run configuration.
    #[arg(long, value_name = "FILE")]
    save_config: Option<PathBuf>,
    /// Binary model, TSV export directory or JSON export.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<EvalMode>,
    /// Report (JSON) output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV data for cdf, histogram and track modes.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// nmi/fbeta: triplet file (slice, word, section).
    #[arg(long)]
    triplets: Option<PathBuf>,
    /// nmi/fbeta: section counts (slice, word, section, count) to build triplets from.
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Popular words examined per slice [default: 200]
    #[arg(long)]
    top_n: Option<usize>,
    /// Section share a word must exceed [default: 0.35]
    #[arg(long)]
    threshold: Option<f64>,
    /// Rank popularity per (slice, section) instead of per slice [default: false]
    #[arg(long)]
    per_section: Option<bool>,
    /// Number of clusters [default: number of sections]
    #[arg(long)]
    clusters: Option<usize>,
    /// k-means seed; MW2V_SEED overrides the config file [default: 1]
    #[arg(long)]
    seed: Option<u64>,
    /// k-means iteration cap [default: 100]
    #[arg(long)]
    max_iters: Option<usize>,
    /// F-beta weight [default: 5]
    #[arg(long)]
    beta: Option<f64>,
    /// Cluster every (slice, word) rather than only triplet items [default: false]
    #[arg(long)]
    all_items: Option<bool>,
    /// alignment: test file (slice, word, slice', word').
    #[arg(long)]
    test: Option<PathBuf>,
    /// alignment: cut-offs for MP@k [default: 1,3,5,10]
    #[arg(long, value_delimiter = ',')]
    ks: Option<Vec<usize>>,
    /// alignment: drop the source word from the candidates [default: false]
    #[arg(long)]
    exclude_source: Option<bool>,
    /// cdf: minimum number of slices containing a word [default: 8]
    #[arg(long)]
    min_slices: Option<usize>,
    /// histogram: base slice.
    #[arg(long)]
    base: Option<SliceId>,
    /// histogram: slices to compare [default: all but the base]
    #[arg(long, value_delimiter = ',')]
    against: Option<Vec<SliceId>>,
    /// histogram: number of bins [default: 20]
    #[arg(long)]
    bins: Option<usize>,
    /// track: anchor slice.
    #[arg(long)]
    slice: Option<SliceId>,
    /// track: anchor word.
    #[arg(long)]
    word: Option<String>,
    /// track: neighbours per slice [default: 8]
    #[arg(long, short)]
    k: Option<usize>,
}

#[derive(Args, Debug)]
struct ExportArgs {
    /// Binary model, TSV export directory or JSON export.
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value = "tsv", value_parser = ExportFormat::from_str)]
    format: ExportFormat,
    /// Output directory (tsv) or file (json).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct InspectArgs {
    #[arg(long)]
    model: PathBuf,
}

/// A stored, replayable command invocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    Train(TrainRun),
    Eval(EvalRun),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainRun {
    pub corpus: Vec<PathBuf>,
    pub slice_files: Vec<SliceFile>,
    pub model: PathBuf,
    pub log: Option<PathBuf>,
    pub training: TrainingConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalRun {
    pub model: PathBuf,
    pub mode: EvalMode,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub triplets: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub triplet_options: TripletOptions,
    pub clustering: ClusteringOptions,
    pub test: Option<PathBuf>,
    pub ks: Vec<usize>,
    pub exclude_source: bool,
    pub min_slices: usize,
    pub base: Option<SliceId>,
    pub against: Vec<SliceId>,
    pub bins: usize,
    pub slice: Option<SliceId>,
    pub word: Option<String>,
    pub k: usize,
}

impl Default for EvalRun {
    fn default() -> Self {
        EvalRun {
            model: PathBuf::new(),
            mode: EvalMode::default(),
            out: None,
            csv: None,
            triplets: None,
            annotations: None,
            triplet_options: TripletOptions::default(),
            clustering: ClusteringOptions::default(),
            test: None,
            ks: vec![1, 3, 5, 10],
            exclude_source: false,
            min_slices: 8,
            base: None,
            against: Vec::new(),
            bins: 20,
            slice: None,
            word: None,
            k: 8,
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format("run config", format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, serde_json::to_string_pretty(self)? + "\n").map_err(|e| Error::file(path, e))
    }
}

/// Command failure with optional spelling suggestions.
#[derive(Debug)]
pub struct Failure {
    pub error: Error,
    pub suggestions: Vec<String>,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure {
            error,
            suggestions: Vec::new(),
        }
    }
}

impl Failure {
    pub fn to_json(&self) -> String {
        let mut v = json!({ "error": self.error.kind(), "message": self.error.to_string() });
        if !self.suggestions.is_empty() {
            v["suggestions"] = json!(self.suggestions);
        }
        v.to_string()
    }
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidConfig(format!("{SEED_ENV}={s:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn load_run<T>(path: &Option<PathBuf>, pick: impl Fn(RunConfig) -> Option<T>, what: &str) -> Result<Option<T>> {
    path.as_ref()
        .map(|p| {
            pick(RunConfig::load(p)?)
                .ok_or_else(|| Error::InvalidConfig(format!("{} is not a {what} run config", p.display())))
        })
        .transpose()
}

macro_rules! overlay {
    ($target:expr, $($field:ident),+ $(,)?) => {
        $(if let Some(v) = $field { $target.$field = v; })+
    };
}

fn resolve_train(args: TrainArgs) -> Result<TrainRun> {
    let mut run = load_run(
        &args.config,
        |r| match r {
            RunConfig::Train(t) => Some(t),
            _ => None,
        },
        "train",
    )?
    .unwrap_or_default();
    if !args.corpus.corpus.is_empty() || !args.corpus.slice_files.is_empty() {
        run.corpus = args.corpus.corpus;
        run.slice_files = args.corpus.slice_files;
    }
    if let Some(out) = args.out {
        run.model = out;
    }
    if args.log.is_some() {
        run.log = args.log;
    }
    if let Some(seed) = env_seed()? {
        run.training.seed = seed;
    }
    let TrainArgs {
        dim,
        window,
        lambda,
        regularize_output,
        slice_vocab,
        epochs,
        batch_size,
        init_scale,
        seed,
        deterministic,
        workers,
        ..
    } = args;
    let t = &mut run.training;
    overlay!(t, dim, window, lambda, regularize_output, slice_vocab, epochs, batch_size, init_scale, seed, deterministic, workers);
    if let Some(r) = args.neg_ratio {
        t.negative_ratio = r;
    }
    if let Some(Subsample(s)) = args.subsample {
        t.subsample = s;
    }
    if let Some(v) = args.base_lr {
        t.clr.base_lr = v;
    }
    if let Some(v) = args.max_lr {
        t.clr.max_lr = v;
    }
    if let Some(v) = args.cycle_steps {
        t.clr.cycle_steps = v;
    }
    if run.model.as_os_str().is_empty() {
        return Err(Error::InvalidConfig("no model output path (--out)".into()));
    }
    if run.corpus.is_empty() && run.slice_files.is_empty() {
        return Err(Error::InvalidConfig("no corpus given (--corpus or --slice-file)".into()));
    }
    run.training.validate()?;
    Ok(run)
}

fn resolve_eval(args: EvalArgs) -> Result<EvalRun> {
    let mut run = load_run(
        &args.config,
        |r| match r {
            RunConfig::Eval(e) => Some(e),
            _ => None,
        },
        "eval",
    )?
    .unwrap_or_default();
    if let Some(seed) = env_seed()? {
        run.clustering.seed = seed;
    }
    let EvalArgs {
        model,
        mode,
        exclude_source,
        min_slices,
        bins,
        k,
        ks,
        against,
        ..
    } = args;
    overlay!(run, model, mode, exclude_source, min_slices, bins, k, ks, against);
    for (slot, v) in [
        (&mut run.out, args.out),
        (&mut run.csv, args.csv),
        (&mut run.triplets, args.triplets),
        (&mut run.annotations, args.annotations),
        (&mut run.test, args.test),
    ] {
        if v.is_some() {
            *slot = v;
        }
    }
    if args.base.is_some() {
        run.base = args.base;
    }
    if args.slice.is_some() {
        run.slice = args.slice;
    }
    if args.word.is_some() {
        run.word = args.word;
    }
    let (top_n, threshold) = (args.top_n, args.threshold);
    overlay!(run.triplet_options, top_n, threshold);
    if let Some(p) = args.per_section {
        run.triplet_options.scope = if p {
            PopularityScope::SliceSection
        } else {
            PopularityScope::Slice
        };
    }
    if args.clusters.is_some() {
        run.clustering.k = args.clusters;
    }
    let (seed, max_iters, beta, all_items) = (args.seed, args.max_iters, args.beta, args.all_items);
    overlay!(run.clustering, seed, max_iters, beta, all_items);
    if run.model.as_os_str().is_empty() {
        return Err(Error::InvalidConfig("no model given (--model)".into()));
    }
    Ok(run)
}

fn load_corpus_files(corpus: &[PathBuf], slice_files: &[SliceFile]) -> Result<Vec<crate::corpus::SliceCorpus>> {
    let files: Vec<(SliceId, &Path)> = slice_files.iter().map(|f| (f.slice.clone(), f.path.as_path())).collect();
    let jsonl: Vec<&Path> = corpus.iter().map(PathBuf::as_path).collect();
    load_corpora(&jsonl, &files)
}

fn write_file(path: &Path, content: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, content).map_err(|e| Error::file(path, e))
}

fn cmd_build_vocab(args: BuildVocabArgs) -> Result<()> {
    let corpora = load_corpus_files(&args.corpus.corpus, &args.corpus.slice_files)?;
    if corpora.is_empty() {
        return Err(Error::InvalidConfig("no corpus given (--corpus or --slice-file)".into()));
    }
    let vocabs = corpora
        .iter()
        .map(|c| build_slice_vocab(c, args.slice_vocab))
        .collect::<Result<Vec<_>>>()?;
    let index = merge_global_vocab(vocabs)?;
    fs::create_dir_all(&args.out).map_err(|e| Error::file(&args.out, e))?;
    let mut out = std::io::stdout().lock();
    for v in index.slices() {
        let id = v.slice().as_str();
        if id == "global" || id.starts_with('.') || id.contains(['/', '\\']) {
            return Err(Error::InvalidInput(format!("slice id {id:?} cannot be used as a file name")));
        }
        let mut buf = Vec::new();
        v.write_tsv(&mut buf)?;
        write_file(&args.out.join(format!("{id}.tsv")), buf)?;
        writeln!(out, "{id}\t{}", v.len())?;
    }
    let mut buf = Vec::new();
    index.write_tsv(&mut buf)?;
    write_file(&args.out.join("global.tsv"), buf)?;
    writeln!(out, "global\t{}", index.len())?;
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let save = args.save_config.clone();
    let run = resolve_train(args)?;
    if let Some(path) = save {
        RunConfig::Train(run.clone()).save(path)?;
    }
    let c = &run.training;
    info!(
        "dim = {}, window = {}, lambda = {:e}, negatives = {}, subsample = {:?}, seed = {}",
        c.dim, c.window, c.lambda, c.negative_ratio, c.subsample, c.seed
    );
    let corpora = load_corpus_files(&run.corpus, &run.slice_files)?;
    let (model, log) = train(&corpora, &run.training)?;
    save_model(&model, &run.model)?;
    if let Some(path) = &run.log {
        write_file(path, serde_json::to_string_pretty(&log)? + "\n")?;
    }
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "trained {} slices, |V| = {}, d = {}, window = {}, lambda = {:e}",
        model.vocab.num_slices(),
        model.vocab.len(),
        c.dim,
        c.window,
        c.lambda
    )?;
    if let Some(last) = log.epochs.last() {
        for s in &last.slices {
            writeln!(out, "epoch {}/{} {}: objective {:.6}", last.epoch + 1, c.epochs, s.slice, s.loss.total)?;
        }
    }
    writeln!(out, "model written to {}", run.model.display())?;
    Ok(())
}

/// Up to three slice words closest to `word` by edit distance.
fn suggestions(emb: &ComposedEmbeddings, slice: &SliceId, word: &str) -> Vec<String> {
    let Ok(pos) = emb.slice_position(slice) else {
        return emb.slices().iter().map(|s| s.id().to_string()).collect();
    };
    let mut scored: Vec<(usize, &str)> = emb
        .slice(pos)
        .members()
        .iter()
        .map(|&g| emb.word(g))
        .map(|w| (strsim::levenshtein(word, w), w))
        .collect();
    scored.sort();
    scored.into_iter().take(3).map(|(_, w)| w.to_owned()).collect()
}

fn cmd_neighbors(args: NeighborsArgs) -> std::result::Result<(), Failure> {
    let emb = read_embeddings(&args.model)?;
    let query = match emb.lookup(&args.slice, &args.word) {
        Ok((_, _, v)) => v,
        Err(error @ (Error::UnknownWord { .. } | Error::UnknownSlice(_))) => {
            return Err(Failure {
                suggestions: suggestions(&emb, &args.slice, &args.word),
                error,
            })
        }
        Err(e) => return Err(e.into()),
    };
    let target = args.target_slice.as_ref().unwrap_or(&args.slice);
    let exclude = args.exclude_query.then_some(args.word.as_str());
    let list = nearest_neighbors(&emb, query, target, args.k, exclude)?;
    let mut table = String::from("rank\tword\tcosine\n");
    let mut csv = String::from("rank,word,cosine\n");
    for (i, n) in list.iter().enumerate() {
        table.push_str(&format!("{}\t{}\t{:.6}\n", i + 1, n.word, n.cosine));
        csv.push_str(&format!("{},{},{}\n", i + 1, n.word, n.cosine));
    }
    std::io::stdout().lock().write_all(table.as_bytes()).map_err(Error::from)?;
    if let Some(path) = &args.csv {
        write_file(path, csv)?;
    }
    Ok(())
}

fn required<'a, T>(v: &'a Option<T>, flag: &str, mode: EvalMode) -> Result<&'a T> {
    v.as_ref()
        .ok_or_else(|| Error::InvalidConfig(format!("--{flag} is required for {mode:?} mode")))
}

/// Runs one evaluation, returning the reports and optional CSV data.
pub fn run_eval(run: &EvalRun) -> Result<(Vec<MetricReport>, Option<String>)> {
    let emb = read_embeddings(&run.model)?;
    match run.mode {
        EvalMode::Nmi | EvalMode::Fbeta => {
            let triplets = match (&run.triplets, &run.annotations) {
                (Some(p), _) => read_triplets(p)?,
                (None, Some(p)) => build_triplets(&read_annotations(p)?, &run.triplet_options)?,
                (None, None) => {
                    return Err(Error::InvalidConfig(
                        "--triplets or --annotations is required for nmi/fbeta".into(),
                    ))
                }
            };
            let outcome = evaluate_clustering(&emb, &triplets, &run.clustering)?;
            let base = |metric: &str, value: f64| {
                MetricReport::new(metric, value)
                    .param("k", outcome.k)
                    .param("seed", run.clustering.seed)
                    .param("max_iters", run.clustering.max_iters)
                    .param("all_items", run.clustering.all_items)
            };
            let details = json!({
                "items": outcome.evaluated,
                "excluded": outcome.excluded.len(),
                "converged": outcome.converged,
                "iterations": outcome.iterations,
            });
            let report = if run.mode == EvalMode::Nmi {
                base("nmi", outcome.nmi).details(details)
            } else {
                let f = outcome.f_beta;
                let mut d = details;
                d["precision"] = json!(f.precision);
                d["recall"] = json!(f.recall);
                d["tp"] = json!(f.true_positives);
                d["fp"] = json!(f.false_positives);
                d["fn"] = json!(f.false_negatives);
                base("f_beta", f.value).param("beta", f.beta).details(d)
            };
            Ok((vec![report], None))
        }
        EvalMode::Alignment => {
            let relations = read_alignment(required(&run.test, "test", run.mode)?)?;
            let opts = RetrievalOptions {
                exclude_source: run.exclude_source,
            };
            let details = |s: &crate::eval::AlignmentScore| {
                json!({
                    "value_with_misses": s.value_with_misses,
                    "evaluated": s.evaluated,
                    "total": s.total,
                    "excluded": s.excluded.len(),
                })
            };
            let mrr_score = mrr(&relations, &emb, opts)?;
            for r in &mrr_score.excluded {
                log::warn!(
                    "excluding unresolvable relation {}:{} -> {}:{}",
                    r.slice, r.word, r.target_slice, r.target_word
                );
            }
            let mut reports = Vec::new();
            for &k in &run.ks {
                let s = mp_at_k(&relations, &emb, k, opts)?;
                reports.push(
                    MetricReport::new(format!("mp@{k}"), s.value)
                        .param("k", k)
                        .param("exclude_source", run.exclude_source)
                        .details(details(&s)),
                );
            }
            reports.push(
                MetricReport::new("mrr", mrr_score.value)
                    .param("depth", MRR_DEPTH)
                    .param("exclude_source", run.exclude_source)
                    .details(details(&mrr_score)),
            );
            reports.push(
                MetricReport::new("identity_baseline", identity_baseline(&relations)?)
                    .details(json!({ "total": relations.len() })),
            );
            Ok((reports, None))
        }
        EvalMode::Cdf => {
            let r = cosine_similarity_report(&emb, run.min_slices)?;
            let report = MetricReport::new("fraction_stable", r.fraction_stable)
                .param("min_slices", run.min_slices)
                .param("threshold", STABLE_COSINE)
                .details(json!({ "words": r.words, "representations": r.entries.len() }));
            Ok((vec![report], Some(cdf_csv(&r))))
        }
        EvalMode::Histogram => {
            let base = required(&run.base, "base", run.mode)?;
            let against: Vec<SliceId> = if run.against.is_empty() {
                emb.slices().iter().map(|s| s.id().clone()).filter(|s| s != base).collect()
            } else {
                run.against.clone()
            };
            let h = distance_histogram(&emb, base, &against, run.bins)?;
            let reports = h
                .slices
                .iter()
                .map(|s| {
                    MetricReport::new("mean_distance", s.mean)
                        .param("base", base)
                        .param("slice", &s.slice)
                        .param("bins", run.bins)
                        .details(json!({ "shared": s.shared, "counts": s.counts, "edges": h.edges }))
                })
                .collect();
            Ok((reports, Some(histogram_csv(&h))))
        }
        EvalMode::Track => {
            let slice = required(&run.slice, "slice", run.mode)?;
            let word = required(&run.word, "word", run.mode)?;
            let t = track_neighbors(&emb, slice, word, run.k)?;
            let report = MetricReport::new("neighbor_track", t.trajectories.len() as f64)
                .param("slice", slice)
                .param("word", word)
                .param("k", run.k)
                .details(&t);
            Ok((vec![report], Some(track_csv(&t))))
        }
    }
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let save = args.save_config.clone();
    let run = resolve_eval(args)?;
    if let Some(path) = save {
        RunConfig::Eval(run.clone()).save(path)?;
    }
    let (reports, csv) = run_eval(&run)?;
    match &run.out {
        Some(path) => write_reports(&reports, path)?,
        None => {
            let text = serde_json::to_string_pretty(&reports)? + "\n";
            std::io::stdout().lock().write_all(text.as_bytes())?;
        }
    }
    match (&run.csv, csv) {
        (Some(path), Some(data)) => write_file(path, data)?,
        (Some(_), None) => log::warn!("{:?} mode has no CSV output", run.mode),
        _ => {}
    }
    Ok(())
}

fn cmd_export(args: ExportArgs) -> Result<()> {
    let emb = read_embeddings(&args.model)?;
    match args.format {
        ExportFormat::Tsv => write_tsv_dir(&emb, &args.out),
        ExportFormat::Json => write_json(&emb, &args.out),
    }
}

fn cmd_inspect(args: InspectArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let header = json!({
        "format_version": FORMAT_VERSION,
        "dim": model.tables.dim(),
        "vocab_size": model.vocab.len(),
        "slices": model
            .vocab
            .slices()
            .iter()
            .map(|s| json!({ "id": s.slice(), "vocab_size": s.len(), "tokens": s.total_count() }))
            .collect::<Vec<_>>(),
        "config": model.config,
    });
    let text = serde_json::to_string_pretty(&header)? + "\n";
    std::io::stdout().lock().write_all(text.as_bytes())?;
    Ok(())
}

pub fn run(cli: Cli) -> std::result::Result<(), Failure> {
    match cli.command {
        Command::BuildVocab(a) => cmd_build_vocab(a)?,
        Command::Train(a) => cmd_train(a)?,
        Command::Neighbors(a) => cmd_neighbors(a)?,
        Command::Eval(a) => cmd_eval(a)?,
        Command::Export(a) => cmd_export(a)?,
        Command::Inspect(a) => cmd_inspect(a)?,
    }
    Ok(())
}

/// Entry point of the `mw2v` binary.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            eprintln!("{}", json!({ "error": "usage", "message": e.to_string() }));
            return ExitCode::from(2);
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.verbose {
            log::LevelFilter::Info
        } else {
            log::LevelFilter::Warn
        })
        .parse_env("MW2V_LOG")
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::FAILURE
        }
    }
}
