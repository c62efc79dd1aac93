//! `popcast`: dataset preparation, labeling, ranking, training and evaluation
//! of sentence popularity forecasters.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{cross_eval, eval, ingest, label, rank, synth, train};
use config::{CliError, CmdResult, ConfigSource};

#[derive(Parser)]
#[command(name = "popcast", version, about = "Sentence popularity forecasting toolkit")]
struct Cli {
    /// TOML config file, or a manifest written by an earlier run. Flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: available cores). Results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Filter raw documents into a canonical corpus.
    Ingest(ingest::IngestArgs),
    /// Write popularity or salience labels into a corpus.
    Label(label::LabelArgs),
    /// Score every sentence with a baseline or a trained model.
    Rank(rank::RankArgs),
    /// Train the regressor, optionally pretraining on a salience task.
    Train(train::TrainArgs),
    /// Compare score vectors against labels.
    Eval(eval::EvalArgs),
    /// Evaluate a scorer trained on one task against another task's labels.
    CrossEval(cross_eval::CrossEvalArgs),
    /// Generate a synthetic labeled corpus with queries and summaries.
    Synth(synth::SynthArgs),
}

fn run(cli: Cli) -> CmdResult<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return config::config_error("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Config(format!("--jobs {jobs}: {e}")))?;
    }
    let source = ConfigSource::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Ingest(a) => ingest::run(a, &source),
        Command::Label(a) => label::run(a, &source),
        Command::Rank(a) => rank::run(a, &source),
        Command::Train(a) => train::run(a, &source),
        Command::Eval(a) => eval::run(a, &source),
        Command::CrossEval(a) => cross_eval::run(a, &source),
        Command::Synth(a) => synth::run(a, &source),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("popcast: {e}");
            match e {
                CliError::Config(_) => ExitCode::from(2),
                CliError::Data(_) => ExitCode::from(1),
            }
        }
    }
}
