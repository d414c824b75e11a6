use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use koslinker::Hyperparameters;

/// Learn links between a thesaurus and a classification system, and serve
/// them to the explorer.
///
/// Every flag can also be set through a `KOSLINKER_*` environment variable;
/// flags win.
#[derive(Debug, Parser)]
#[command(name = "koslinker", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse the KOS files and documents, write the corpus cache.
    Ingest(IngestArgs),
    /// Fit the topic model on a corpus cache, write the model file.
    Train(TrainArgs),
    /// Extract per-class descriptor links, write the link tree.
    Links(LinksArgs),
    /// Serve the link tree, suggestions and the explorer assets.
    Serve(ServeArgs),
    /// Write a synthetic classification, thesaurus and document set.
    Synthesize(SynthesizeArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long, env = "KOSLINKER_CLASSIFICATION")]
    pub classification: PathBuf,
    #[arg(long, env = "KOSLINKER_THESAURUS")]
    pub thesaurus: PathBuf,
    #[arg(long, env = "KOSLINKER_DOCUMENTS")]
    pub documents: PathBuf,
    /// Corpus cache to write.
    #[arg(long, env = "KOSLINKER_CORPUS")]
    pub corpus: PathBuf,
    /// Fail on unknown class codes and unresolvable descriptors.
    #[arg(long, env = "KOSLINKER_STRICT")]
    pub strict: bool,
    #[arg(long, env = "KOSLINKER_MIN_DF", default_value_t = 5)]
    pub min_df: usize,
    #[arg(long, env = "KOSLINKER_MAX_DF_RATIO", default_value_t = 0.5)]
    pub max_df_ratio: f64,
    /// Stopword file, one word per line.
    #[arg(long, env = "KOSLINKER_STOPWORDS")]
    pub stopwords: Option<PathBuf>,
    /// Also label documents with the ancestors of their classes.
    #[arg(long, env = "KOSLINKER_PROPAGATE_LABELS")]
    pub propagate_labels: bool,
    #[arg(long, env = "KOSLINKER_MAX_LEVEL", default_value_t = koslinker::kos::DEFAULT_MAX_LEVEL)]
    pub max_level: usize,
}

#[derive(Debug, Args)]
pub struct HyperArgs {
    #[arg(long, env = "KOSLINKER_ALPHA", default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, env = "KOSLINKER_BETA_WORDS", default_value_t = 0.01)]
    pub beta_words: f64,
    #[arg(long, env = "KOSLINKER_BETA_DESC", default_value_t = 0.01)]
    pub beta_desc: f64,
    #[arg(long, env = "KOSLINKER_ITERATIONS", default_value_t = 1000)]
    pub iterations: usize,
    #[arg(long, env = "KOSLINKER_BURN_IN", default_value_t = 500)]
    pub burn_in: usize,
    #[arg(long, env = "KOSLINKER_SAMPLE_LAG", default_value_t = 10)]
    pub sample_lag: usize,
    #[arg(long, env = "KOSLINKER_SEED", default_value_t = 42)]
    pub seed: u64,
}

impl From<&HyperArgs> for Hyperparameters {
    fn from(a: &HyperArgs) -> Self {
        Hyperparameters {
            alpha: a.alpha,
            beta_words: a.beta_words,
            beta_descriptors: a.beta_desc,
            iterations: a.iterations,
            burn_in: a.burn_in,
            sample_lag: a.sample_lag,
            seed: a.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, env = "KOSLINKER_CORPUS")]
    pub corpus: PathBuf,
    /// Model file to write.
    #[arg(long, env = "KOSLINKER_MODEL")]
    pub model: PathBuf,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Print the log-likelihood every this many sweeps.
    #[arg(long, env = "KOSLINKER_REPORT_EVERY", default_value_t = 50)]
    pub report_every: usize,
}

#[derive(Debug, Args)]
pub struct LinksArgs {
    #[arg(long, env = "KOSLINKER_MODEL")]
    pub model: PathBuf,
    #[arg(long, env = "KOSLINKER_CLASSIFICATION")]
    pub classification: PathBuf,
    #[arg(long, env = "KOSLINKER_THESAURUS")]
    pub thesaurus: PathBuf,
    /// Link-tree file to write.
    #[arg(long, env = "KOSLINKER_TREE")]
    pub tree: PathBuf,
    #[arg(long, env = "KOSLINKER_TOP_K", default_value_t = koslinker::links::DEFAULT_TOP_K)]
    pub top_k: usize,
    #[arg(long, env = "KOSLINKER_MAX_LEVEL", default_value_t = koslinker::kos::DEFAULT_MAX_LEVEL)]
    pub max_level: usize,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "KOSLINKER_TREE")]
    pub tree: PathBuf,
    /// Enables /api/suggest together with --classification.
    #[arg(long, env = "KOSLINKER_MODEL", requires = "classification")]
    pub model: Option<PathBuf>,
    #[arg(long, env = "KOSLINKER_CLASSIFICATION")]
    pub classification: Option<PathBuf>,
    /// Directory with the explorer's static files.
    #[arg(long, env = "KOSLINKER_ASSETS")]
    pub assets: Option<PathBuf>,
    #[arg(long, env = "KOSLINKER_ADDRESS", default_value = "127.0.0.1")]
    pub address: String,
    #[arg(long, env = "KOSLINKER_PORT", default_value_t = 8080,
          value_parser = clap::value_parser!(u16).range(1..))]
    pub port: u16,
    #[arg(long, env = "KOSLINKER_MAX_LEVEL", default_value_t = koslinker::kos::DEFAULT_MAX_LEVEL)]
    pub max_level: usize,
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub topics: usize,
    #[arg(long, default_value_t = 500)]
    pub words: usize,
    #[arg(long, default_value_t = 200)]
    pub descriptors: usize,
    #[arg(long, default_value_t = 2000)]
    pub docs: usize,
    #[arg(long, default_value_t = 40)]
    pub words_per_doc: usize,
    #[arg(long, default_value_t = 10)]
    pub descriptors_per_doc: usize,
    #[arg(long, default_value_t = 2)]
    pub labels_per_doc: usize,
    #[arg(long, default_value_t = 0.05)]
    pub concentration: f64,
    #[arg(long, env = "KOSLINKER_SEED", default_value_t = 1)]
    pub seed: u64,
}
