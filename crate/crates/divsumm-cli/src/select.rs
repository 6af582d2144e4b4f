//! `select-control-set` subcommand.

use std::fs::File;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use divsumm::{select_control_set, LabeledPool};

use crate::common::{
    load_corpus, load_embeddings, to_pretty_json, write_output, CliError, CliResult, FormatArg,
};

#[derive(Debug, Args)]
pub struct SelectArgs {
    /// Labeled pool (JSONL; every record needs a dialect).
    #[arg(long)]
    pub pool: PathBuf,

    /// Word vectors in word2vec text format.
    #[arg(long)]
    pub embeddings: PathBuf,

    /// Total control-set size (half per label); must be even.
    #[arg(long)]
    pub control_size: usize,

    /// Cross-validation folds.
    #[arg(long, default_value_t = 5)]
    pub folds: usize,

    /// Candidate draws per fold.
    #[arg(long, default_value_t = 50)]
    pub trials: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Where to write the chosen set as control-set JSONL.
    #[arg(long)]
    pub control_set_out: PathBuf,

    /// Report output path (standard output when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn run(args: &SelectArgs) -> CliResult<()> {
    if args.control_size < 2 || !args.control_size.is_multiple_of(2) {
        return Err(CliError::usage("--control-size must be an even number >= 2"));
    }
    if args.folds < 2 {
        return Err(CliError::usage("--folds must be at least 2"));
    }
    if args.trials == 0 {
        return Err(CliError::usage("--trials must be at least 1"));
    }

    let corpus = load_corpus(&args.pool, FormatArg::Jsonl)?;
    let pool = LabeledPool::from_corpus(&corpus)?;
    let store = load_embeddings(&args.embeddings)?;

    let report = select_control_set(
        &pool,
        args.control_size,
        args.folds,
        args.trials,
        &store,
        args.seed,
    )?;

    let file = File::create(&args.control_set_out)
        .with_context(|| format!("cannot create {}", args.control_set_out.display()))?;
    report.candidate.write_jsonl(file)?;

    write_output(args.output.as_ref(), &to_pretty_json(&report.to_doc())?)
}
