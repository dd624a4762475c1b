use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rumble_core::{Error, PipelineConfig};

mod commands;

/// Elephant rumble detection in geophone recordings.
#[derive(Debug, Parser)]
#[command(name = "rumble", version)]
struct Cli {
    /// JSON pipeline configuration; unknown keys are rejected.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for every seeded stage; overrides the config.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a ground-velocity record through the acquisition chain.
    Simulate(commands::SimulateArgs),
    /// Generate a labeled synthetic corpus.
    Synth(commands::SynthArgs),
    /// Power spectrogram of a recording.
    Spectrogram(commands::SpectrogramArgs),
    /// Coherence enhancement and threshold adjustment of a power spectrogram.
    Enhance(commands::EnhanceArgs),
    /// MFCC, Hjorth and SED features of a corpus.
    Features(commands::FeaturesArgs),
    /// Train one classifier on a feature file.
    Train(commands::TrainArgs),
    /// Evaluate a saved model on a feature file.
    Evaluate(commands::EvaluateArgs),
    /// Compare every feature kind with its registered algorithms.
    Leaderboard(commands::LeaderboardArgs),
    /// Structural similarity of two spectrograms.
    Ssim(commands::SsimArgs),
    /// Synthesize, simulate, extract, train and rank in one go.
    Run,
}

/// 2 for bad input, 3 for a broken stage contract, 4 for numeric failure.
fn exit_code(e: &Error) -> u8 {
    if e.is_contract() {
        3
    } else if e.is_numeric() {
        4
    } else {
        2
    }
}

fn run(cli: Cli) -> rumble_core::Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    std::fs::create_dir_all(&cli.out)?;
    let out = cli.out.as_path();
    match cli.command {
        Command::Simulate(a) => commands::simulate(a, &cfg, out),
        Command::Synth(a) => commands::synth(a, &cfg, out),
        Command::Spectrogram(a) => commands::spectrogram(a, &cfg, out),
        Command::Enhance(a) => commands::enhance(a, &cfg, out),
        Command::Features(a) => commands::features(a, &cfg, out),
        Command::Train(a) => commands::train(a, &cfg, out),
        Command::Evaluate(a) => commands::evaluate(a, &cfg, out),
        Command::Leaderboard(a) => commands::leaderboard(a, &cfg, out),
        Command::Ssim(a) => commands::ssim(a),
        Command::Run => commands::run_all(&cfg, out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
