mod commands;
mod output;
mod serve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "tg", version, about = "Topic Grouper: train, inspect, evaluate and serve word-clustering topic models")]
struct Cli {
    /// Worker threads for parallel evaluation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// error, warn, info, debug or trace.
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,
    /// Memory budget in bytes for the exhaustive trainer.
    #[arg(long, global = true)]
    memory_budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a corpus cache from bag-of-words, text or transaction input.
    Ingest(IngestArgs),
    /// Generate a synthetic corpus and its true model.
    Synth(SynthArgs),
    /// Split a corpus into train and test caches.
    Split(SplitArgs),
    /// Train a dendrogram (ehac, mehac) or an LDA model.
    Train(TrainArgs),
    /// Print the flat topics T(n) sorted by frequency.
    Topics(TopicsArgs),
    /// Emit the Δh_n series as CSV.
    Series(SeriesArgs),
    /// Export the tree as Graphviz DOT or FreeMind.
    Export(ExportArgs),
    /// Held-out perplexity of a model.
    EvalPerplexity(PerplexityArgs),
    /// Error rate of a model against a synthetic truth.
    EvalError(ErrorArgs),
    /// Naive Bayes accuracy over reduced feature spaces.
    Classify(ClassifyArgs),
    /// Serve the explorer HTTP API for a dendrogram.
    Serve(ServeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum InputFormat {
    Bow,
    Text,
    Transactions,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long, value_enum)]
    format: InputFormat,
    #[arg(long)]
    input: PathBuf,
    /// Vocabulary file for bag-of-words input (one word per line).
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Transaction lines with a larger quantity are skipped.
    #[arg(long, default_value_t = 100)]
    quantity_cap: u32,
    #[arg(long, default_value_t = 3)]
    min_token_length: usize,
    /// Keep tokens containing non-alphabetic characters.
    #[arg(long)]
    keep_non_alphabetic: bool,
    #[arg(long)]
    stem: bool,
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Drop words rarer than this in the whole text collection.
    #[arg(long, default_value_t = 5)]
    min_freq: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    topics: usize,
    #[arg(long, default_value_t = 100)]
    words_per_topic: usize,
    #[arg(long, default_value_t = 6000)]
    docs: usize,
    #[arg(long, default_value_t = 30)]
    doc_length: usize,
    #[arg(long, default_value_t = 0.01)]
    beta: f64,
    /// Document-topic prior, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "5,0.5,0.5,0.5")]
    alpha_m: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    truth: PathBuf,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 0.25)]
    test_ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed split: file with one test document id per line.
    #[arg(long, conflicts_with_all = ["test_ratio", "seed"])]
    test_ids: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    min_train_freq: u64,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Ehac,
    Mehac,
    Lda,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_enum, default_value = "mehac")]
    algo: Algo,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// LDA: number of topics.
    #[arg(long)]
    n: Option<usize>,
    /// LDA: document-topic prior (default symmetric 50/n in total).
    #[arg(long, value_delimiter = ',')]
    alpha_m: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    #[arg(long, default_value_t = 500)]
    iterations: usize,
    #[arg(long, default_value_t = 200)]
    burn_in: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct TopicsArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 40)]
    n: usize,
    #[arg(long, default_value_t = 7)]
    top: usize,
}

#[derive(Args)]
struct SeriesArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Dot,
    Freemind,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum)]
    format: ExportFormat,
    #[arg(long, default_value_t = 6)]
    max_depth: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// What to evaluate: a model file (dendrogram or topic model) or a baseline.
#[derive(Args)]
struct ModelSource {
    /// Model JSON, or `unigram` / `perfect` for the baselines.
    #[arg(long)]
    model: String,
    /// Cut of a dendrogram, or topic count of the unigram baseline.
    #[arg(long)]
    n: Option<usize>,
    /// Training corpus (needed for dendrograms and baselines).
    #[arg(long)]
    train: Option<PathBuf>,
    /// True model file (needed for `perfect`).
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct PerplexityArgs {
    #[command(flatten)]
    source: ModelSource,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, default_value_t = 20)]
    particles: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed concentration instead of fitting it on the training corpus.
    #[arg(long)]
    alpha: Option<f64>,
    /// Fit alpha on at most this many training documents.
    #[arg(long)]
    alpha_docs: Option<usize>,
    /// Report JSON (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV to append an `n_topics,perplexity` row to.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ErrorArgs {
    #[command(flatten)]
    source: ModelSource,
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV to append an `n_topics,error_rate` row to.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReducerKind {
    Tg,
    Lda,
    Ig,
    Df,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long, value_enum)]
    reducer: ReducerKind,
    /// Topic counts (tg, lda) or word counts (ig, df), comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n_or_k: Vec<usize>,
    #[arg(long)]
    corpus: PathBuf,
    /// CSV with `doc_id,label`.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value_t = 0.25)]
    test_ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed split: file with one test document id per line.
    #[arg(long)]
    test_ids: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    min_train_freq: u64,
    /// tg: dendrogram trained on the training side (trained here if absent).
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 500)]
    lda_iterations: usize,
    #[arg(long, default_value_t = 200)]
    lda_burn_in: usize,
    #[arg(long, default_value_t = 10)]
    fold_chains: usize,
    #[arg(long, default_value_t = 50)]
    fold_sweeps: usize,
    #[arg(long, default_value_t = 20)]
    fold_discard: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// 0 picks a free port; the bound address is printed on stdout.
    #[arg(long, default_value_t = 8080)]
    port: u16,
}

fn error_kind(e: &anyhow::Error) -> &'static str {
    if let Some(e) = e.downcast_ref::<topic_grouper::Error>() {
        return e.kind();
    }
    if e.downcast_ref::<std::io::Error>().is_some() {
        return "io";
    }
    if e.downcast_ref::<serde_json::Error>().is_some() {
        return "json";
    }
    "error"
}

fn report(kind: &str, message: &str) {
    eprintln!("{}", serde_json::json!({ "error": kind, "message": message }));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg = e.to_string();
            report("usage", msg.lines().next().unwrap_or("").trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .format_timestamp(None)
        .init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            report("invalid_argument", &e.to_string());
            return ExitCode::from(2);
        }
    }
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            report(error_kind(&e), &msg);
            ExitCode::FAILURE
        }
    }
}
