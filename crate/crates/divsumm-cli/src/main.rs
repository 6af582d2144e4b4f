//! Command-line interface: summarize, evaluate, select control sets and run
//! experiment sweeps.

mod common;
mod evaluate;
mod experiment;
mod select;
mod summarize;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use common::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "divsumm",
    version,
    about = "Extractive summarization of short posts with diversity control sets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a corpus and emit a summary as JSON.
    Summarize(summarize::SummarizeArgs),
    /// ROUGE a summary against references and/or report label fractions.
    Evaluate(evaluate::EvaluateArgs),
    /// Pick a control set from a labeled pool by cross-validated AUC.
    SelectControlSet(select::SelectArgs),
    /// Sweep scorers, alphas, sizes and compositions over sampled collections.
    Experiment(experiment::ExperimentArgs),
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Summarize(args) => summarize::run(args),
        Command::Evaluate(args) => evaluate::run(args),
        Command::SelectControlSet(args) => select::run(args),
        Command::Experiment(args) => experiment::run(args),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            std::process::exit(0);
        }
        Err(e) => {
            eprint!("{e}");
            std::process::exit(1);
        }
    };
    match run(&cli) {
        Ok(()) => {}
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}
