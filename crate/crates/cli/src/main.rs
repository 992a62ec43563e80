//! Command-line front end: dataset generation, training, evaluation and
//! single-frame mitigation.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{error::ErrorKind, Args, Parser, Subcommand};
use rimnet::Error;

/// Exit codes.
const EXIT_USAGE: u8 = 1;
const EXIT_FORMAT: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "rimnet", version, about = "Radar interference mitigation with a residual bidirectional GRU")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a dataset of interfered/clean frame pairs.
    Generate(GenerateArgs),
    /// Train the network on a dataset.
    Train(TrainArgs),
    /// Score mitigation methods with SRINR.
    Evaluate(EvaluateArgs),
    /// Clean one frame stored as CSV.
    Mitigate(MitigateArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Scenario configuration (TOML). Defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub count: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Validation set. When omitted a share of `--data` is held out.
    #[arg(long)]
    pub val: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Best-validation checkpoint. The last epoch goes to `<stem>.final.rimc`.
    #[arg(long)]
    pub ckpt_out: PathBuf,
    /// JSON-lines training log. Defaults to `<stem>.log.jsonl`.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Override `train.epochs`.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Override `train.hidden_size`.
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Override `train.num_layers`.
    #[arg(long)]
    pub layers: Option<usize>,
    /// Override `train.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Required when `proposed` is among the methods.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "none,tdt,envelope")]
    pub methods: Vec<String>,
    #[arg(long)]
    pub report: PathBuf,
    /// Write one spectrum CSV per frame here.
    #[arg(long)]
    pub spectra_dir: Option<PathBuf>,
    /// Baseline parameters come from `[baselines]`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Score only the first N frames.
    #[arg(long)]
    pub limit: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MitigateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Spectrum table. Defaults to `<out stem>.spectra.csv`.
    #[arg(long)]
    pub spectra: Option<PathBuf>,
    /// Axis scaling of the spectrum table.
    #[arg(long, default_value_t = 20e6)]
    pub sample_rate: f64,
    /// Chirp slope in Hz/s, for the range axis.
    #[arg(long, default_value_t = 5e12)]
    pub slope: f64,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NonFiniteLoss { .. } => EXIT_NUMERIC,
        Error::ShapeMismatch { .. } | Error::CannotNormalize | Error::NoScorableTarget => EXIT_FORMAT,
        e if e.is_format_error() => EXIT_FORMAT,
        _ => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let result = match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Train(a) => commands::train(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Mitigate(a) => commands::mitigate(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
