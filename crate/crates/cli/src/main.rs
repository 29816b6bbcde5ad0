//! `revrank`: ingest reviews, extract features, train, rank and evaluate.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{FileConfig, GlobalFlags, PipelineFlags};

#[derive(Debug, Parser)]
#[command(name = "revrank", version, about = "Rank product reviews by predicted helpfulness")]
struct Cli {
    #[command(flatten)]
    global: GlobalFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse, clean and join reviews, descriptions and Q&A into a corpus file.
    Ingest(IngestArgs),
    /// Write the feature matrix of a corpus.
    Featurize(FeaturizeArgs),
    /// Label, balance, split and fit the classifier and regressors.
    Train(TrainArgs),
    /// Rank the reviews of a corpus with trained models.
    Rank(RankArgs),
    /// Score trained models on held-out labeled features.
    Evaluate(EvaluateArgs),
    /// Ingest, featurize, train, evaluate and rank in one go.
    Run(RunArgs),
    /// Write a synthetic corpus whose votes follow a known function of the features.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Reviews file (CSV or JSON lines).
    #[arg(long)]
    pub reviews: PathBuf,
    /// csv or jsonl; guessed from the extension when absent.
    #[arg(long)]
    pub reviews_format: Option<String>,
    /// Product descriptions (JSON lines).
    #[arg(long)]
    pub descriptions: Option<PathBuf>,
    /// Customer questions and answers (JSON lines).
    #[arg(long)]
    pub qa: Option<PathBuf>,
    /// Abort when a larger fraction of records is malformed.
    #[arg(long)]
    pub max_reject_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "corpus.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value = "features.csv")]
    pub out: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Precomputed features; extracted from the corpus when absent.
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long, default_value = "models")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value = "models")]
    pub models: PathBuf,
    /// Precomputed features; extracted from the corpus when absent.
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long, default_value = "ranking.json")]
    pub out: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, default_value = "models")]
    pub models: PathBuf,
    /// Labeled features; defaults to test_features.csv in the models directory.
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long, default_value = "report.json")]
    pub out: PathBuf,
    #[arg(long, default_value = "roc.csv")]
    pub roc: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "revrank-out")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 2000)]
    pub n_reviews: usize,
    #[arg(long, default_value_t = 20)]
    pub reviews_per_product: usize,
    /// Standard deviation of the Gaussian vote noise.
    #[arg(long, default_value_t = 10.0)]
    pub noise_sd: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file = match &cli.global.config {
        Some(path) => match FileConfig::load(path) {
            Ok(f) => f,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(e.exit_code() as u8);
            }
        },
        None => FileConfig::default(),
    };
    env_logger::Builder::new()
        .filter_level(config::log_level(&cli.global, &file))
        .format_timestamp(None)
        .init();
    match commands::dispatch(cli.command, &cli.global, &file) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
