//! `evaluate` subcommand.

use std::path::PathBuf;

use clap::Args;
use divsumm::summarizers::{Summary, SummaryDoc, SummaryEntry};
use divsumm::{rouge_multi, DiversityReport, RougeScores};
use serde::Serialize;

use crate::common::{
    load_corpus, load_reference_tokens, open, to_pretty_json, write_output, CliError, CliResult,
    FormatArg, LabelKeyArg,
};

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Summary JSON produced by `summarize`.
    #[arg(long)]
    pub summary: PathBuf,

    /// Reference summary file; repeat for multi-reference averaging.
    #[arg(long)]
    pub reference: Vec<PathBuf>,

    /// Reference encoding (plain: one post per line).
    #[arg(long, value_enum, default_value = "plain")]
    pub reference_format: FormatArg,

    /// Labeled corpus for the diversity report.
    #[arg(long)]
    pub corpus: Option<PathBuf>,

    /// Corpus encoding.
    #[arg(long, value_enum, default_value = "jsonl")]
    pub format: FormatArg,

    /// Which label the diversity report reads.
    #[arg(long, value_enum, default_value = "dialect")]
    pub label_key: LabelKeyArg,

    /// Unused; accepted so every subcommand shares the same flag set.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output path (standard output when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct EvaluationDoc {
    rouge: Option<RougeScores>,
    diversity: Option<DiversityReport>,
}

pub fn run(args: &EvaluateArgs) -> CliResult<()> {
    if args.reference.is_empty() && args.corpus.is_none() {
        return Err(CliError::usage(
            "nothing to evaluate: pass --reference and/or --corpus",
        ));
    }

    let doc: SummaryDoc = serde_json::from_reader(open(&args.summary)?)
        .map_err(|e| CliError::Data(anyhow::anyhow!("{}: {e}", args.summary.display())))?;

    let rouge = if args.reference.is_empty() {
        None
    } else {
        let candidate: Vec<String> = doc
            .entries
            .iter()
            .flat_map(|e| divsumm::tokenize(&e.text))
            .collect();
        let mut references = Vec::with_capacity(args.reference.len());
        for path in &args.reference {
            references.push(load_reference_tokens(path, args.reference_format)?);
        }
        Some(rouge_multi(&candidate, &references)?)
    };

    let diversity = match &args.corpus {
        None => None,
        Some(path) => {
            let corpus = load_corpus(path, args.format)?;
            let summary = Summary {
                entries: doc
                    .entries
                    .iter()
                    .map(|e| SummaryEntry {
                        id: e.id.clone(),
                        score: e.score,
                    })
                    .collect(),
                m: doc.m,
                scorer_name: doc.scorer.clone(),
                alpha: doc.alpha,
                control_name: doc.control_set.clone(),
            };
            Some(divsumm::dialect_fraction(
                &summary,
                &corpus,
                args.label_key.into(),
            )?)
        }
    };

    let out = EvaluationDoc { rouge, diversity };
    write_output(args.output.as_ref(), &to_pretty_json(&out)?)
}
