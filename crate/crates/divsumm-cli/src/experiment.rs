//! `experiment` subcommand: seeded sweeps over sampled collections.
//!
//! For every grid point (scorer, alpha, m, composition) the harness samples
//! collections of a fixed size and label composition, runs the blackbox
//! scorer and its diversified variant, and reports the mean and standard
//! error of the diversified summary's minority fraction and of its ROUGE-1 F
//! against the undiversified summary.

use std::path::PathBuf;

use clap::Args;
use divsumm::diversify::ScoreSource;
use divsumm::{
    dialect_fraction, load_external_scores, rouge1, Corpus, EmbeddingStore, ScoreVector, Scorer,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::common::{
    load_control_set, load_corpus, load_embeddings, open, write_output, CliError, CliResult,
    FormatArg, LabelKeyArg,
};

pub const CSV_HEADER: &str = "scorer,alpha,m,composition,mean_minority_fraction,\
stderr_minority_fraction,mean_r1_f,stderr_r1_f,repetitions";

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Labeled corpus to sample collections from.
    #[arg(long)]
    pub corpus: PathBuf,

    /// Corpus encoding.
    #[arg(long, value_enum, default_value = "jsonl")]
    pub format: FormatArg,

    /// Word vectors in word2vec text format.
    #[arg(long)]
    pub embeddings: PathBuf,

    /// Diversity control set driving the balanced runs.
    #[arg(long)]
    pub control_set: PathBuf,

    /// Scorers to sweep (`external` needs --scores).
    #[arg(long, value_delimiter = ',',
          default_value = "tfidf,hybrid-tfidf,lexrank,textrank,centroid")]
    pub scorers: Vec<String>,

    /// External scores over the full corpus, for the `external` scorer.
    #[arg(long)]
    pub scores: Option<PathBuf>,

    /// Mixing weights to sweep.
    #[arg(long, value_delimiter = ',', default_value = "0.0,0.5")]
    pub alphas: Vec<f64>,

    /// Summary sizes to sweep.
    #[arg(long, value_delimiter = ',', default_value = "50")]
    pub sizes: Vec<usize>,

    /// Target minority fractions of the sampled collections.
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub compositions: Vec<f64>,

    /// Posts per sampled collection.
    #[arg(long, default_value_t = 5000)]
    pub collection_size: usize,

    /// Samples per grid point.
    #[arg(long, default_value_t = 50)]
    pub repetitions: usize,

    /// Label whose fraction the composition grid controls.
    #[arg(long)]
    pub minority_label: String,

    /// Which per-post label to read.
    #[arg(long, value_enum, default_value = "dialect")]
    pub label_key: LabelKeyArg,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// CSV output path (standard output when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent substream per (composition, repetition) so repetitions can run
/// in parallel and still reproduce exactly.
fn substream_seed(seed: u64, composition_idx: usize, repetition: usize) -> u64 {
    let a = splitmix64(seed ^ 0xA076_1D64_78BD_642F);
    let b = splitmix64(a ^ (composition_idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    splitmix64(b ^ (repetition as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

enum ScorerSpec {
    Builtin(Scorer),
    External,
}

impl ScorerSpec {
    fn name(&self) -> &str {
        match self {
            ScorerSpec::Builtin(s) => s.name(),
            ScorerSpec::External => "external",
        }
    }
}

/// (minority fraction, rouge-1 F vs blackbox) per [scorer][alpha][m].
type RepetitionMetrics = Vec<Vec<Vec<(f64, f64)>>>;

pub fn run(args: &ExperimentArgs) -> CliResult<()> {
    if args.alphas.is_empty() || args.sizes.is_empty() || args.compositions.is_empty() {
        return Err(CliError::usage("grids must be non-empty"));
    }
    if args.repetitions == 0 {
        return Err(CliError::usage("--repetitions must be at least 1"));
    }
    if let Some(alpha) = args.alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(CliError::usage(format!("alpha {alpha} outside [0, 1]")));
    }
    if let Some(c) = args.compositions.iter().find(|c| !(0.0..=1.0).contains(*c)) {
        return Err(CliError::usage(format!("composition {c} outside [0, 1]")));
    }
    if args.sizes.contains(&0) {
        return Err(CliError::usage("summary sizes must be at least 1"));
    }

    let scorers: Vec<ScorerSpec> = args
        .scorers
        .iter()
        .map(|name| match name.as_str() {
            "external" => Ok(ScorerSpec::External),
            other => other
                .parse::<Scorer>()
                .map(ScorerSpec::Builtin)
                .map_err(|e| CliError::usage(e.to_string())),
        })
        .collect::<CliResult<_>>()?;
    let wants_external = scorers.iter().any(|s| matches!(s, ScorerSpec::External));
    if wants_external && args.scores.is_none() {
        return Err(CliError::usage("scorer `external` requires --scores"));
    }

    let corpus = load_corpus(&args.corpus, args.format)?;
    let store = load_embeddings(&args.embeddings)?;
    let control = load_control_set(&args.control_set)?;
    let external = match &args.scores {
        Some(path) => Some(load_external_scores(open(path)?, &corpus)?),
        None => None,
    };

    let label_key: divsumm::LabelKey = args.label_key.into();
    let label_of = |idx: usize| -> Option<&str> {
        let post = corpus.post(idx);
        match label_key {
            divsumm::LabelKey::Dialect => post.dialect.as_deref(),
            divsumm::LabelKey::Group => post.group.as_deref(),
        }
    };
    let minority_idx: Vec<usize> = (0..corpus.n())
        .filter(|&i| label_of(i) == Some(args.minority_label.as_str()))
        .collect();
    let majority_idx: Vec<usize> = (0..corpus.n())
        .filter(|&i| matches!(label_of(i), Some(l) if l != args.minority_label))
        .collect();
    if minority_idx.is_empty() {
        return Err(CliError::Data(anyhow::anyhow!(
            "no posts carry the minority label `{}`",
            args.minority_label
        )));
    }

    // Reject infeasible grid points before any sampling.
    for &composition in &args.compositions {
        let want_minority = (composition * args.collection_size as f64).round() as usize;
        let want_majority = args.collection_size - want_minority;
        if want_minority > minority_idx.len() || want_majority > majority_idx.len() {
            return Err(CliError::Data(anyhow::anyhow!(
                "composition {composition}: needs {want_minority} minority and {want_majority} \
                 majority posts, corpus has {} and {}",
                minority_idx.len(),
                majority_idx.len()
            )));
        }
    }

    // metrics[composition][repetition][scorer][alpha][m]
    let mut metrics: Vec<Vec<RepetitionMetrics>> = Vec::with_capacity(args.compositions.len());
    for (ci, &composition) in args.compositions.iter().enumerate() {
        let reps: Vec<CliResult<RepetitionMetrics>> = (0..args.repetitions)
            .into_par_iter()
            .map(|rep| {
                run_repetition(
                    args,
                    &scorers,
                    &corpus,
                    &store,
                    &control,
                    external.as_ref(),
                    &minority_idx,
                    &majority_idx,
                    composition,
                    substream_seed(args.seed, ci, rep),
                )
            })
            .collect();
        let mut per_rep = Vec::with_capacity(args.repetitions);
        for rep in reps {
            per_rep.push(rep?);
        }
        metrics.push(per_rep);
    }

    // Emit rows in fixed grid order regardless of compute order.
    let mut csv = String::new();
    csv.push_str(CSV_HEADER);
    csv.push('\n');
    for (si, scorer) in scorers.iter().enumerate() {
        for (ai, &alpha) in args.alphas.iter().enumerate() {
            for (mi, &m) in args.sizes.iter().enumerate() {
                for (ci, &composition) in args.compositions.iter().enumerate() {
                    let fracs: Vec<f64> =
                        metrics[ci].iter().map(|rep| rep[si][ai][mi].0).collect();
                    let r1fs: Vec<f64> =
                        metrics[ci].iter().map(|rep| rep[si][ai][mi].1).collect();
                    let (frac_mean, frac_se) = mean_stderr(&fracs);
                    let (r1_mean, r1_se) = mean_stderr(&r1fs);
                    csv.push_str(&format!(
                        "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{}\n",
                        scorer.name(),
                        alpha,
                        m,
                        composition,
                        frac_mean,
                        frac_se,
                        r1_mean,
                        r1_se,
                        args.repetitions
                    ));
                }
            }
        }
    }
    write_output(args.output.as_ref(), &csv)
}

#[allow(clippy::too_many_arguments)]
fn run_repetition(
    args: &ExperimentArgs,
    scorers: &[ScorerSpec],
    corpus: &Corpus,
    store: &EmbeddingStore,
    control: &divsumm::ControlSet,
    external: Option<&ScoreVector>,
    minority_idx: &[usize],
    majority_idx: &[usize],
    composition: f64,
    seed: u64,
) -> CliResult<RepetitionMetrics> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let want_minority = (composition * args.collection_size as f64).round() as usize;
    let want_majority = args.collection_size - want_minority;

    let mut chosen: Vec<usize> = Vec::with_capacity(args.collection_size);
    for (stratum, want) in [(minority_idx, want_minority), (majority_idx, want_majority)] {
        let picks = rand::seq::index::sample(&mut rng, stratum.len(), want);
        chosen.extend(picks.iter().map(|p| stratum[p]));
    }
    chosen.sort_unstable(); // collection keeps corpus order
    let collection = Corpus::from_posts(chosen.iter().map(|&i| corpus.post(i).clone()).collect())?;

    let label_key: divsumm::LabelKey = args.label_key.into();
    let mut out: RepetitionMetrics = Vec::with_capacity(scorers.len());
    for scorer in scorers {
        let raw = match scorer {
            ScorerSpec::Builtin(s) => s.score(&collection, Some(store))?,
            ScorerSpec::External => {
                let full = external.expect("validated before sampling");
                let subset: Vec<f64> = chosen.iter().map(|&i| full.scores()[i]).collect();
                ScoreVector::new(subset, "external")?
            }
        };

        let mut per_alpha = Vec::with_capacity(args.alphas.len());
        for &alpha in &args.alphas {
            let mut per_m = Vec::with_capacity(args.sizes.len());
            for &m in &args.sizes {
                let blackbox = divsumm::select_top_m(&raw, &collection, m);
                let blackbox_tokens = blackbox.tokens(&collection)?;
                let balanced = divsumm::balanced_pipeline(
                    &collection,
                    store,
                    ScoreSource::External(&raw),
                    control,
                    alpha,
                    m,
                )?;
                let report = dialect_fraction(&balanced, &collection, label_key)?;
                let fraction = report
                    .fractions
                    .get(args.minority_label.as_str())
                    .copied()
                    .unwrap_or(0.0);
                let balanced_tokens = balanced.tokens(&collection)?;
                let r1 = rouge1(&balanced_tokens, &blackbox_tokens);
                per_m.push((fraction, r1.f));
            }
            per_alpha.push(per_m);
        }
        out.push(per_alpha);
    }
    Ok(out)
}

/// Mean and standard error (sample standard deviation over sqrt(n)); a
/// single repetition reports a standard error of 0.
fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt() / n.sqrt())
}
