//! `summarize` subcommand.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use divsumm::diversify::ScoreSource;
use divsumm::{
    load_external_scores, normalize_scores, score_tfidf, select_centroid, select_mmr,
    select_top_m, Scorer,
};

use crate::common::{
    load_control_set, load_corpus, load_embeddings, open, to_pretty_json, write_output, CliError,
    CliResult, FormatArg,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    Tfidf,
    HybridTfidf,
    Lexrank,
    Textrank,
    Centroid,
    Mmr,
    External,
}

impl AlgorithmArg {
    fn as_scorer(self) -> Option<Scorer> {
        match self {
            AlgorithmArg::Tfidf => Some(Scorer::Tfidf),
            AlgorithmArg::HybridTfidf => Some(Scorer::HybridTfidf),
            AlgorithmArg::Lexrank => Some(Scorer::LexRank),
            AlgorithmArg::Textrank => Some(Scorer::TextRank),
            AlgorithmArg::Centroid => Some(Scorer::Centroid),
            AlgorithmArg::Mmr | AlgorithmArg::External => None,
        }
    }
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    /// Corpus file to summarize.
    #[arg(long)]
    pub corpus: PathBuf,

    /// Corpus encoding.
    #[arg(long, value_enum, default_value = "jsonl")]
    pub format: FormatArg,

    /// Scoring algorithm.
    #[arg(long, value_enum)]
    pub algorithm: AlgorithmArg,

    /// Summary size m.
    #[arg(long)]
    pub size: usize,

    /// Word vectors in word2vec text format; required for centroid, mmr and
    /// any diversified run.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,

    /// External scores (JSONL of {"id","score"}) for --algorithm external.
    #[arg(long)]
    pub scores: Option<PathBuf>,

    /// Diversity control set (JSONL of {"id","text","dialect"}); enables the
    /// balanced pipeline.
    #[arg(long)]
    pub control_set: Option<PathBuf>,

    /// Mixing weight between importance and control similarity.
    #[arg(long, default_value_t = divsumm::DEFAULT_ALPHA)]
    pub alpha: f64,

    /// Relevance/diversity trade-off for mmr.
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,

    /// Unused; accepted so every subcommand shares the same flag set.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output path (standard output when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn run(args: &SummarizeArgs) -> CliResult<()> {
    if args.size == 0 {
        return Err(CliError::usage("--size must be at least 1"));
    }
    if !(0.0..=1.0).contains(&args.alpha) {
        return Err(CliError::usage("--alpha must lie in [0, 1]"));
    }
    if !(0.0..=1.0).contains(&args.lambda) {
        return Err(CliError::usage("--lambda must lie in [0, 1]"));
    }
    let needs_embeddings = matches!(args.algorithm, AlgorithmArg::Centroid | AlgorithmArg::Mmr)
        || args.control_set.is_some();
    if needs_embeddings && args.embeddings.is_none() {
        return Err(CliError::usage(
            "--embeddings is required for centroid, mmr and diversified runs",
        ));
    }
    if args.algorithm == AlgorithmArg::External && args.scores.is_none() {
        return Err(CliError::usage("--algorithm external requires --scores"));
    }
    if args.algorithm == AlgorithmArg::Mmr && args.control_set.is_some() {
        return Err(CliError::usage(
            "mmr is itself a re-ranking rule and cannot be used as a diversified blackbox",
        ));
    }

    let corpus = load_corpus(&args.corpus, args.format)?;
    if corpus.is_empty() {
        return Err(CliError::Data(anyhow::anyhow!("corpus is empty")));
    }
    let store = match &args.embeddings {
        Some(path) => Some(load_embeddings(path)?),
        None => None,
    };
    let external = match &args.scores {
        Some(path) => Some(load_external_scores(open(path)?, &corpus)?),
        None => None,
    };

    let summary = if let Some(control_path) = &args.control_set {
        let control = load_control_set(control_path)?;
        let store = store.as_ref().expect("validated above");
        let source = match args.algorithm {
            AlgorithmArg::External => ScoreSource::External(external.as_ref().unwrap()),
            _ => ScoreSource::Builtin(args.algorithm.as_scorer().unwrap()),
        };
        divsumm::balanced_pipeline(&corpus, store, source, &control, args.alpha, args.size)?
    } else {
        match args.algorithm {
            AlgorithmArg::Centroid => {
                select_centroid(&corpus, store.as_ref().unwrap(), args.size)
            }
            AlgorithmArg::Mmr => {
                // MMR re-ranks TF-IDF importance scores.
                let scores = normalize_scores(&score_tfidf(&corpus));
                select_mmr(&scores, &corpus, store.as_ref().unwrap(), args.lambda, args.size)
            }
            AlgorithmArg::External => select_top_m(external.as_ref().unwrap(), &corpus, args.size),
            _ => {
                let scorer = args.algorithm.as_scorer().unwrap();
                let scores = scorer.score(&corpus, store.as_ref())?;
                select_top_m(&scores, &corpus, args.size)
            }
        }
    };

    let doc = summary.to_doc(&corpus)?;
    write_output(args.output.as_ref(), &to_pretty_json(&doc)?)
}
