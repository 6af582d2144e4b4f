//! Control-set construction and validation.
//!
//! Candidate control sets are drawn from a small labeled pool and judged by
//! how well nearest-control-similarity predicts the held-out labels, scored
//! with AUC and V-measure over a stratified k-fold split.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::{Corpus, Post};
use crate::diversify::ControlSet;
use crate::embeddings::{cosine, sentence_vector, EmbeddingStore, SentenceVector, DEFAULT_SIF_A};
use crate::error::{Error, Result};

/// Small pool of posts with a binary dialect label.
#[derive(Debug, Clone)]
pub struct LabeledPool {
    posts: Vec<Post>,
    /// The two labels in ascending order.
    labels: [String; 2],
}

impl LabeledPool {
    /// Builds a pool; every post must carry a dialect label and exactly two
    /// distinct labels must be present. Ids must be unique.
    pub fn new(posts: Vec<Post>) -> Result<LabeledPool> {
        let mut seen = std::collections::HashSet::new();
        let mut labels: Vec<String> = Vec::new();
        for post in &posts {
            if !seen.insert(post.id.clone()) {
                return Err(Error::DuplicateId(post.id.clone()));
            }
            let label = post
                .dialect
                .as_ref()
                .ok_or_else(|| Error::invalid(format!("post `{}` has no dialect label", post.id)))?;
            if !labels.contains(label) {
                labels.push(label.clone());
            }
        }
        if labels.len() != 2 {
            return Err(Error::invalid(format!(
                "labeled pool needs exactly two dialect labels, found {}",
                labels.len()
            )));
        }
        labels.sort();
        Ok(LabeledPool {
            posts,
            labels: [labels[0].clone(), labels[1].clone()],
        })
    }

    /// Pulls every post of a corpus into a pool.
    pub fn from_corpus(corpus: &Corpus) -> Result<LabeledPool> {
        LabeledPool::new(corpus.posts().to_vec())
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    /// The two labels in ascending order.
    pub fn labels(&self) -> (&str, &str) {
        (&self.labels[0], &self.labels[1])
    }

    fn label_of(&self, idx: usize) -> &str {
        self.posts[idx].dialect.as_deref().expect("validated on construction")
    }

    pub fn label_counts(&self) -> BTreeMap<&str, usize> {
        let mut counts = BTreeMap::new();
        for post in &self.posts {
            *counts.entry(post.dialect.as_deref().unwrap()).or_insert(0) += 1;
        }
        counts
    }
}

/// Predicts a post's dialect as the label of the most similar control entry
/// (ties go to the entry with the lower id). The margin is the difference of
/// the best similarities toward the two labels (greater label minus lesser,
/// in ascending label order); it is 0 for non-binary control sets.
pub fn predict_dialect(
    post: &Post,
    control: &ControlSet,
    store: &EmbeddingStore,
) -> (String, f64) {
    let post_vec = sentence_vector(post, store, DEFAULT_SIF_A);
    let entry_vecs: Vec<SentenceVector> = control
        .entries()
        .iter()
        .map(|e| sentence_vector(&e.post, store, DEFAULT_SIF_A))
        .collect();

    let mut best: Option<(f64, &str, &str)> = None; // (sim, id, label)
    let mut best_by_label: BTreeMap<&str, f64> = BTreeMap::new();
    for (entry, vec) in control.entries().iter().zip(&entry_vecs) {
        let sim = cosine(post_vec.values(), vec.values());
        let better = match best {
            None => true,
            Some((bs, bid, _)) => sim > bs || (sim == bs && entry.post.id.as_str() < bid),
        };
        if better {
            best = Some((sim, &entry.post.id, &entry.label));
        }
        best_by_label
            .entry(entry.label.as_str())
            .and_modify(|m| *m = m.max(sim))
            .or_insert(sim);
    }

    let label = best.map(|(_, _, l)| l.to_string()).unwrap_or_default();
    let margin = if best_by_label.len() == 2 {
        let mut vals = best_by_label.values();
        let lo_label_max = *vals.next().unwrap();
        let hi_label_max = *vals.next().unwrap();
        hi_label_max - lo_label_max
    } else {
        0.0
    };
    (label, margin)
}

/// Mann-Whitney AUC: the probability that a random positive margin exceeds a
/// random negative one, ties counting one half.
pub fn auc(margins: &[f64], labels: &[bool]) -> Result<f64> {
    if margins.len() != labels.len() {
        return Err(Error::invalid("auc: margins and labels differ in length"));
    }
    let positives: Vec<f64> = margins
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l)
        .map(|(&m, _)| m)
        .collect();
    let negatives: Vec<f64> = margins
        .iter()
        .zip(labels)
        .filter(|(_, &l)| !l)
        .map(|(&m, _)| m)
        .collect();
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::invalid("auc: both classes must be present"));
    }
    let mut wins = 0.0;
    for &p in &positives {
        for &n in &negatives {
            if p > n {
                wins += 1.0;
            } else if p == n {
                wins += 0.5;
            }
        }
    }
    Ok(wins / (positives.len() * negatives.len()) as f64)
}

fn entropy(counts: &BTreeMap<&str, f64>, n: f64) -> f64 {
    counts
        .values()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / n;
            -p * p.ln()
        })
        .sum()
}

/// V-measure of a labeling against the truth: the harmonic mean of
/// homogeneity and completeness computed from conditional entropies.
/// Defined as 1 when both marginal entropies are 0.
pub fn v_measure(assigned: &[&str], truth: &[&str]) -> Result<f64> {
    if assigned.len() != truth.len() {
        return Err(Error::invalid("v_measure: length mismatch"));
    }
    if assigned.is_empty() {
        return Err(Error::invalid("v_measure: empty input"));
    }
    let n = assigned.len() as f64;

    let mut cluster_counts: BTreeMap<&str, f64> = BTreeMap::new();
    let mut class_counts: BTreeMap<&str, f64> = BTreeMap::new();
    let mut joint: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    for (&k, &c) in assigned.iter().zip(truth) {
        *cluster_counts.entry(k).or_insert(0.0) += 1.0;
        *class_counts.entry(c).or_insert(0.0) += 1.0;
        *joint.entry((k, c)).or_insert(0.0) += 1.0;
    }

    let h_class = entropy(&class_counts, n);
    let h_cluster = entropy(&cluster_counts, n);

    let mut h_class_given_cluster = 0.0;
    let mut h_cluster_given_class = 0.0;
    for (&(k, c), &count) in &joint {
        let p = count / n;
        h_class_given_cluster -= p * (count / cluster_counts[k]).ln();
        h_cluster_given_class -= p * (count / class_counts[c]).ln();
    }

    let homogeneity = if h_class == 0.0 {
        1.0
    } else {
        (1.0 - h_class_given_cluster / h_class).max(0.0)
    };
    let completeness = if h_cluster == 0.0 {
        1.0
    } else {
        (1.0 - h_cluster_given_class / h_cluster).max(0.0)
    };
    if homogeneity + completeness == 0.0 {
        Ok(0.0)
    } else {
        Ok(2.0 * homogeneity * completeness / (homogeneity + completeness))
    }
}

/// Per-fold evaluation statistics over the sampled candidates.
#[derive(Debug, Clone, Serialize)]
pub struct FoldScore {
    pub fold: usize,
    pub mean_auc: f64,
    pub max_auc: f64,
    pub mean_v_measure: f64,
    pub max_v_measure: f64,
}

/// Where and how well the winning candidate scored.
#[derive(Debug, Clone, Serialize)]
pub struct ChosenStats {
    pub fold: usize,
    pub trial: usize,
    pub auc: f64,
    pub v_measure: f64,
}

/// Result of [`select_control_set`]: the winning candidate plus the scores
/// that justify it. `auc` and `v_measure` are means over folds of the
/// per-fold trial means.
#[derive(Debug, Clone)]
pub struct ControlSetReport {
    pub candidate: ControlSet,
    pub auc: f64,
    pub v_measure: f64,
    pub fold_scores: Vec<FoldScore>,
    pub chosen: ChosenStats,
}

/// Serializable form of a [`ControlSetReport`].
#[derive(Debug, Clone, Serialize)]
pub struct ReportDoc {
    pub name: String,
    pub size: usize,
    pub candidate: Vec<CandidateEntryDoc>,
    pub mean_auc: f64,
    pub mean_v_measure: f64,
    pub folds: Vec<FoldScore>,
    pub chosen: ChosenStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateEntryDoc {
    pub id: String,
    pub dialect: String,
}

impl ControlSetReport {
    pub fn to_doc(&self) -> ReportDoc {
        ReportDoc {
            name: self.candidate.name().to_string(),
            size: self.candidate.len(),
            candidate: self
                .candidate
                .entries()
                .iter()
                .map(|e| CandidateEntryDoc {
                    id: e.post.id.clone(),
                    dialect: e.label.clone(),
                })
                .collect(),
            mean_auc: self.auc,
            mean_v_measure: self.v_measure,
            folds: self.fold_scores.clone(),
            chosen: self.chosen.clone(),
        }
    }
}

/// Draws balanced candidate control sets from each fold's train partition,
/// predicts the validation partition's labels with each candidate, and
/// returns the candidate with the highest AUC across its evaluations.
///
/// `size` is the total candidate size (half per label) and must be even.
/// Runs are fully reproducible for a fixed `seed`.
pub fn select_control_set(
    pool: &LabeledPool,
    size: usize,
    folds: usize,
    trials: usize,
    store: &EmbeddingStore,
    seed: u64,
) -> Result<ControlSetReport> {
    if size < 2 || !size.is_multiple_of(2) {
        return Err(Error::invalid("control-set size must be an even number >= 2"));
    }
    if folds < 2 {
        return Err(Error::invalid("need at least two folds"));
    }
    if trials == 0 {
        return Err(Error::invalid("need at least one trial per fold"));
    }
    let per_label = size / 2;
    let (label0, label1) = pool.labels();

    // Word probabilities come from the pool itself; vectors are cached.
    let pool_corpus = Corpus::from_posts(pool.posts().to_vec())?;
    let prob_store = store.with_corpus_probs(&pool_corpus);
    let vectors: Vec<SentenceVector> = pool
        .posts()
        .iter()
        .map(|p| sentence_vector(p, &prob_store, DEFAULT_SIF_A))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Stratified fold assignment: shuffle each label stratum, deal round-robin.
    let mut fold_of = vec![0usize; pool.len()];
    for label in [label0, label1] {
        let mut stratum: Vec<usize> = (0..pool.len())
            .filter(|&i| pool.label_of(i) == label)
            .collect();
        stratum.shuffle(&mut rng);
        for (pos, idx) in stratum.into_iter().enumerate() {
            fold_of[idx] = pos % folds;
        }
    }

    for fold in 0..folds {
        for label in [label0, label1] {
            let available = (0..pool.len())
                .filter(|&i| fold_of[i] == fold && pool.label_of(i) == label)
                .count();
            if available < per_label {
                return Err(Error::invalid(format!(
                    "fold {fold}: train partition has {available} posts with label `{label}`, \
                     need {per_label}"
                )));
            }
        }
    }

    let mut fold_scores = Vec::with_capacity(folds);
    let mut best: Option<(f64, f64, usize, usize, Vec<usize>)> = None; // (auc, v, fold, trial, members)

    for fold in 0..folds {
        let train0: Vec<usize> = (0..pool.len())
            .filter(|&i| fold_of[i] == fold && pool.label_of(i) == label0)
            .collect();
        let train1: Vec<usize> = (0..pool.len())
            .filter(|&i| fold_of[i] == fold && pool.label_of(i) == label1)
            .collect();
        let validation: Vec<usize> = (0..pool.len()).filter(|&i| fold_of[i] != fold).collect();

        let mut aucs = Vec::with_capacity(trials);
        let mut vms = Vec::with_capacity(trials);
        for trial in 0..trials {
            let mut members: Vec<usize> = Vec::with_capacity(size);
            for stratum in [&train0, &train1] {
                let picks = rand::seq::index::sample(&mut rng, stratum.len(), per_label);
                members.extend(picks.iter().map(|p| stratum[p]));
            }
            members.sort_unstable();

            let (fold_auc, fold_v) =
                evaluate_candidate(pool, &vectors, &members, &validation, label1)?;
            aucs.push(fold_auc);
            vms.push(fold_v);

            let improves = match &best {
                None => true,
                Some((best_auc, ..)) => fold_auc > *best_auc,
            };
            if improves {
                best = Some((fold_auc, fold_v, fold, trial, members));
            }
        }

        let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
        let max = |xs: &[f64]| xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        fold_scores.push(FoldScore {
            fold,
            mean_auc: mean(&aucs),
            max_auc: max(&aucs),
            mean_v_measure: mean(&vms),
            max_v_measure: max(&vms),
        });
    }

    let (chosen_auc, chosen_v, chosen_fold, chosen_trial, members) =
        best.expect("at least one candidate was evaluated");
    let entries: Vec<(Post, String)> = members
        .iter()
        .map(|&i| (pool.posts()[i].clone(), pool.label_of(i).to_string()))
        .collect();
    let candidate = ControlSet::new(
        format!("selected-size{size}-fold{chosen_fold}-trial{chosen_trial}"),
        entries,
    )?;

    let mean_over_folds = |f: fn(&FoldScore) -> f64| {
        fold_scores.iter().map(f).sum::<f64>() / fold_scores.len() as f64
    };
    Ok(ControlSetReport {
        candidate,
        auc: mean_over_folds(|s| s.mean_auc),
        v_measure: mean_over_folds(|s| s.mean_v_measure),
        fold_scores,
        chosen: ChosenStats {
            fold: chosen_fold,
            trial: chosen_trial,
            auc: chosen_auc,
            v_measure: chosen_v,
        },
    })
}

/// Nearest-control prediction over the validation posts with cached vectors;
/// semantics match [`predict_dialect`].
fn evaluate_candidate(
    pool: &LabeledPool,
    vectors: &[SentenceVector],
    members: &[usize],
    validation: &[usize],
    label1: &str,
) -> Result<(f64, f64)> {
    let mut margins = Vec::with_capacity(validation.len());
    let mut truth_bool = Vec::with_capacity(validation.len());
    let mut assigned: Vec<&str> = Vec::with_capacity(validation.len());
    let mut truth: Vec<&str> = Vec::with_capacity(validation.len());

    for &v in validation {
        let mut best: Option<(f64, &str, &str)> = None;
        let mut max0 = f64::NEG_INFINITY;
        let mut max1 = f64::NEG_INFINITY;
        for &c in members {
            let sim = cosine(vectors[v].values(), vectors[c].values());
            let id = pool.posts()[c].id.as_str();
            let label = pool.label_of(c);
            let better = match best {
                None => true,
                Some((bs, bid, _)) => sim > bs || (sim == bs && id < bid),
            };
            if better {
                best = Some((sim, id, label));
            }
            if label == label1 {
                max1 = max1.max(sim);
            } else {
                max0 = max0.max(sim);
            }
        }
        let (_, _, label) = best.expect("candidate is non-empty");
        assigned.push(label);
        truth.push(pool.label_of(v));
        margins.push(max1 - max0);
        truth_bool.push(pool.label_of(v) == label1);
    }

    Ok((auc(&margins, &truth_bool)?, v_measure(&assigned, &truth)?))
}
