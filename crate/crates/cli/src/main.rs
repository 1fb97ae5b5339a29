//! `tire`: generate synthetic benchmarks, detect change points, evaluate
//! detections and sweep parameters from the command line.

mod commands;
mod config;
mod error;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Layer;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "tire", version, about = "Change point detection with time-invariant autoencoder features")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write seeded synthetic series (jm, sv, cc, gm) plus a manifest.
    Generate(GenerateArgs),
    /// Run the detection pipeline on one CSV series.
    Detect(DetectArgs),
    /// ROC/AUC of curves, detections or whole series against ground truth.
    Evaluate(EvaluateArgs),
    /// Re-evaluate a corpus for every value of one parameter.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Family: jm, sv, cc or gm.
    family: String,
    /// Seed of the first series; series i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value = "tire-out")]
    out: PathBuf,
    /// Leave the creation time out of the manifest.
    #[arg(long)]
    no_timestamp: bool,
}

/// Flags shared by the pipeline commands; each maps to a config key.
#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Synthetic family whose window size and tolerance to use as presets.
    #[arg(long)]
    family: Option<String>,
    /// Training seed.
    #[arg(long)]
    seed: Option<u64>,
    /// td, fd or combined.
    #[arg(long)]
    mode: Option<String>,
    /// Latent preset: a or b.
    #[arg(long)]
    setting: Option<String>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    delta: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long = "K", alias = "k")]
    k: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    spectrum_len: Option<usize>,
    #[arg(long)]
    h_td: Option<usize>,
    #[arg(long)]
    s_td: Option<usize>,
    #[arg(long)]
    lambda_td: Option<f64>,
    #[arg(long)]
    h_fd: Option<usize>,
    #[arg(long)]
    s_fd: Option<usize>,
    #[arg(long)]
    lambda_fd: Option<f64>,
    /// Smooth feature tracks before the dissimilarity (true/false).
    #[arg(long)]
    smoothing: Option<bool>,
    /// Apply the matched filter to the dissimilarity (true/false).
    #[arg(long)]
    matched_filter: Option<bool>,
    /// prominence or height.
    #[arg(long)]
    scoring: Option<String>,
    /// Ground truth: a series CSV with an `is_cp` column or a CSV with column `t`.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG plot per series.
    #[arg(long)]
    plot: bool,
    /// Print every resolved setting with its origin and exit.
    #[arg(long)]
    explain_config: bool,
}

impl Common {
    fn flag_layer(&self) -> Layer {
        let mut l = Layer::default();
        l.set_opt("seed", self.seed);
        l.set_opt("mode", self.mode.as_ref());
        l.set_opt("setting", self.setting.as_ref());
        l.set_opt("window", self.window);
        l.set_opt("delta", self.delta);
        l.set_opt("tau", self.tau);
        l.set_opt("alpha", self.alpha);
        l.set_opt("beta", self.beta);
        l.set_opt("K", self.k);
        l.set_opt("epochs", self.epochs);
        l.set_opt("batch_size", self.batch_size);
        l.set_opt("learning_rate", self.learning_rate);
        l.set_opt("spectrum_len", self.spectrum_len);
        l.set_opt("h_td", self.h_td);
        l.set_opt("s_td", self.s_td);
        l.set_opt("lambda_td", self.lambda_td);
        l.set_opt("h_fd", self.h_fd);
        l.set_opt("s_fd", self.s_fd);
        l.set_opt("lambda_fd", self.lambda_fd);
        l.set_opt("smoothing", self.smoothing);
        l.set_opt("matched_filter", self.matched_filter);
        l.set_opt("scoring", self.scoring.as_ref());
        l.set_opt("truth", self.truth.as_ref().map(|p| p.display()));
        l.set_opt("out", self.out.as_ref().map(|p| p.display()));
        l
    }
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    input: PathBuf,
    #[command(flatten)]
    common: Common,
    /// Also write the trained autoencoders as model files.
    #[arg(long)]
    save_models: bool,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Series, curve or detection CSVs; empty means a generated corpus.
    inputs: Vec<PathBuf>,
    /// Number of generated series when no inputs are given.
    #[arg(long, default_value_t = 10)]
    count: usize,
    /// Seed of the first generated series.
    #[arg(long, default_value_t = 0)]
    data_seed: u64,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// window, h_td, h_fd, K or lambda.
    parameter: String,
    /// Comma-separated values; defaults to the standard grid of the parameter.
    #[arg(long)]
    values: Option<String>,
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    common: Common,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Detect(a) => commands::detect(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Sweep(a) => commands::sweep(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tire: {e}");
            e.exit_code()
        }
    }
}
