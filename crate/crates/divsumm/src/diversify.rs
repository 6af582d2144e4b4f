//! Diversity-control-set post-processing.
//!
//! A small labeled [`ControlSet`] steers selection: each post gets a blended
//! score against every control item, `(1 - alpha) * A(x) + alpha * sim(z, x)`,
//! and [`diversify_select`] serves the control items round-robin so that the
//! summary resembles the control set's composition without ever reading
//! labels from the collection being summarized.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Post};
use crate::embeddings::{corpus_sentence_vectors, cosine, sentence_vector, EmbeddingStore, DEFAULT_SIF_A};
use crate::error::{Error, Result};
use crate::summarizers::{normalize_scores, ScoreVector, Scorer, Summary, SummaryEntry};

/// Default mixing weight; this value defines the "balanced" variant of a
/// blackbox scorer.
pub const DEFAULT_ALPHA: f64 = 0.5;

/// One labeled example post inside a control set.
#[derive(Debug, Clone)]
pub struct ControlEntry {
    pub post: Post,
    pub label: String,
}

/// Small labeled, dialect-balanced list of posts driving diversification.
#[derive(Debug, Clone)]
pub struct ControlSet {
    name: String,
    entries: Vec<ControlEntry>,
    label_counts: BTreeMap<String, usize>,
    balanced: bool,
}

impl ControlSet {
    /// Builds a control set; requires at least two entries, at least two
    /// distinct labels and unique post ids.
    pub fn new(name: impl Into<String>, entries: Vec<(Post, String)>) -> Result<ControlSet> {
        let set = ControlSet::build(name, entries)?;
        if set.label_counts.len() < 2 {
            return Err(Error::invalid(
                "control set needs at least two distinct labels (use single_label to override)",
            ));
        }
        Ok(set)
    }

    /// Builds a control set that is explicitly allowed to carry one label.
    pub fn single_label(name: impl Into<String>, entries: Vec<(Post, String)>) -> Result<ControlSet> {
        ControlSet::build(name, entries)
    }

    fn build(name: impl Into<String>, entries: Vec<(Post, String)>) -> Result<ControlSet> {
        if entries.len() < 2 {
            return Err(Error::invalid("control set needs at least two entries"));
        }
        let mut seen = std::collections::HashSet::new();
        let mut label_counts: BTreeMap<String, usize> = BTreeMap::new();
        for (post, label) in &entries {
            if !seen.insert(post.id.clone()) {
                return Err(Error::DuplicateId(post.id.clone()));
            }
            *label_counts.entry(label.clone()).or_insert(0) += 1;
        }
        let mut counts = label_counts.values();
        let first = *counts.next().unwrap_or(&0);
        let balanced = counts.all(|&c| c == first);
        Ok(ControlSet {
            name: name.into(),
            entries: entries
                .into_iter()
                .map(|(post, label)| ControlEntry { post, label })
                .collect(),
            label_counts,
            balanced,
        })
    }

    /// Reads a control set from JSONL records `{"id", "text", "dialect"}`.
    pub fn from_jsonl(name: impl Into<String>, reader: impl BufRead) -> Result<ControlSet> {
        #[derive(Deserialize)]
        struct ControlRecord {
            id: String,
            text: String,
            dialect: String,
        }
        let mut entries = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: ControlRecord = serde_json::from_str(&line)
                .map_err(|e| Error::malformed(lineno + 1, e.to_string()))?;
            let label = record.dialect.clone();
            entries.push((
                Post::new(record.id, record.text, Some(record.dialect), None),
                label,
            ));
        }
        ControlSet::new(name, entries)
    }

    /// Writes the set back out as control-set JSONL.
    pub fn write_jsonl(&self, mut writer: impl Write) -> Result<()> {
        #[derive(Serialize)]
        struct ControlRecord<'a> {
            id: &'a str,
            text: &'a str,
            dialect: &'a str,
        }
        for entry in &self.entries {
            let record = ControlRecord {
                id: &entry.post.id,
                text: &entry.post.text,
                dialect: &entry.label,
            };
            serde_json::to_writer(&mut writer, &record)
                .map_err(|e| Error::invalid(e.to_string()))?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn entries(&self) -> &[ControlEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of entries carrying each label.
    pub fn label_counts(&self) -> &BTreeMap<String, usize> {
        &self.label_counts
    }

    /// True when every label has the same number of entries.
    pub fn is_balanced(&self) -> bool {
        self.balanced
    }
}

/// The `|S| x |T|` matrix of blended selection scores.
#[derive(Debug, Clone)]
pub struct DsMatrix {
    post_ids: Vec<String>,
    /// Row per post, column per control item.
    values: Vec<Vec<f64>>,
    alpha: f64,
    scorer_name: String,
    control_name: String,
}

impl DsMatrix {
    /// Wraps raw values; rows must be rectangular and finite.
    pub fn from_values(
        post_ids: Vec<String>,
        values: Vec<Vec<f64>>,
        alpha: f64,
        scorer_name: impl Into<String>,
        control_name: impl Into<String>,
    ) -> Result<DsMatrix> {
        if post_ids.len() != values.len() {
            return Err(Error::invalid("one row of values per post id required"));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::invalid("alpha must lie in [0, 1]"));
        }
        let width = values.first().map_or(0, Vec::len);
        if width == 0 && !values.is_empty() {
            return Err(Error::invalid("matrix needs at least one control column"));
        }
        for row in &values {
            if row.len() != width {
                return Err(Error::invalid("ragged score matrix"));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("score matrix entries must be finite"));
            }
        }
        Ok(DsMatrix {
            post_ids,
            values,
            alpha,
            scorer_name: scorer_name.into(),
            control_name: control_name.into(),
        })
    }

    pub fn n_posts(&self) -> usize {
        self.post_ids.len()
    }

    pub fn n_controls(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn value(&self, post: usize, control: usize) -> f64 {
        self.values[post][control]
    }

    pub fn post_ids(&self) -> &[String] {
        &self.post_ids
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn scorer_name(&self) -> &str {
        &self.scorer_name
    }

    pub fn control_name(&self) -> &str {
        &self.control_name
    }
}

/// Fills the blended score matrix
/// `values[x][z] = (1 - alpha) * A(x) + alpha * sim(z, x)`.
///
/// Scores must be normalized first so both terms share the `[0, 1]` scale.
pub fn build_ds_matrix(
    scores: &ScoreVector,
    control: &ControlSet,
    corpus: &Corpus,
    store: &EmbeddingStore,
    alpha: f64,
) -> Result<DsMatrix> {
    if !scores.is_normalized() {
        return Err(Error::invalid(
            "scores must be normalized (apply normalize_scores) before mixing",
        ));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid("alpha must lie in [0, 1]"));
    }
    if scores.len() != corpus.n() {
        return Err(Error::invalid("scores are not aligned with corpus"));
    }

    let post_vectors = corpus_sentence_vectors(corpus, store);
    let prob_store = store.with_corpus_probs(corpus);
    let control_vectors: Vec<_> = control
        .entries()
        .iter()
        .map(|e| sentence_vector(&e.post, &prob_store, DEFAULT_SIF_A))
        .collect();

    let values: Vec<Vec<f64>> = (0..corpus.n())
        .map(|x| {
            control_vectors
                .iter()
                .map(|vz| {
                    let sim = cosine(vz.values(), post_vectors[x].values());
                    (1.0 - alpha) * scores.scores()[x] + alpha * sim
                })
                .collect()
        })
        .collect();

    let post_ids = corpus.posts().iter().map(|p| p.id.clone()).collect();
    DsMatrix::from_values(post_ids, values, alpha, scores.scorer_name(), control.name())
}

/// Round-robin selection over the control columns.
///
/// Each round serves the control items in fixed order; a column takes the
/// highest-scored post not yet selected globally or earlier in the round.
/// When a full round would exceed the budget, only the picks with the
/// highest blended scores are kept (ties by ascending post id). Summary
/// order is by round, then by control-item order within the round.
pub fn diversify_select(ds: &DsMatrix, m: usize) -> Summary {
    let n = ds.n_posts();
    let t = ds.n_controls();
    let target = m.min(n);

    // Rank posts by ascending id once so column sorts compare integers.
    let mut by_id: Vec<u32> = (0..n as u32).collect();
    by_id.sort_unstable_by(|&a, &b| ds.post_ids()[a as usize].cmp(&ds.post_ids()[b as usize]));
    let mut id_rank = vec![0u32; n];
    for (rank, &post) in by_id.iter().enumerate() {
        id_rank[post as usize] = rank as u32;
    }

    // Per-column rankings: score descending, post id ascending.
    let column_order: Vec<Vec<u32>> = (0..t)
        .map(|z| {
            let mut keyed: Vec<(f64, u32)> = (0..n)
                .map(|p| (ds.value(p, z), id_rank[p]))
                .collect();
            keyed.sort_unstable_by(|a, b| {
                b.0.partial_cmp(&a.0)
                    .unwrap_or(Ordering::Equal)
                    .then_with(|| a.1.cmp(&b.1))
            });
            keyed
                .into_iter()
                .map(|(_, rank)| by_id[rank as usize])
                .collect()
        })
        .collect();

    let mut cursor = vec![0usize; t];
    let mut committed = vec![false; n];
    let mut entries: Vec<SummaryEntry> = Vec::with_capacity(target);
    let mut total = 0usize;

    while total < target {
        // Collect this round's picks in control-item order.
        let mut round: Vec<(usize, f64)> = Vec::with_capacity(t);
        for z in 0..t {
            while cursor[z] < n {
                let cand = column_order[z][cursor[z]] as usize;
                cursor[z] += 1;
                if committed[cand] || round.iter().any(|&(p, _)| p == cand) {
                    continue;
                }
                round.push((cand, ds.value(cand, z)));
                break;
            }
        }
        if round.is_empty() {
            break; // every post is already selected
        }

        let budget = target - total;
        if round.len() <= budget {
            for &(post, score) in &round {
                committed[post] = true;
                entries.push(SummaryEntry {
                    id: ds.post_ids()[post].clone(),
                    score,
                });
            }
            total += round.len();
        } else {
            // Keep the best `budget` picks by score, presenting them in
            // control-item order like any other round.
            let mut by_score: Vec<usize> = (0..round.len()).collect();
            by_score.sort_by(|&a, &b| {
                round[b]
                    .1
                    .partial_cmp(&round[a].1)
                    .unwrap_or(Ordering::Equal)
                    .then_with(|| ds.post_ids()[round[a].0].cmp(&ds.post_ids()[round[b].0]))
            });
            let keep: Vec<bool> = {
                let mut keep = vec![false; round.len()];
                for &pos in by_score.iter().take(budget) {
                    keep[pos] = true;
                }
                keep
            };
            for (pos, &(post, score)) in round.iter().enumerate() {
                if keep[pos] {
                    committed[post] = true;
                    entries.push(SummaryEntry {
                        id: ds.post_ids()[post].clone(),
                        score,
                    });
                }
            }
            total = target;
        }
    }

    Summary {
        entries,
        m,
        scorer_name: ds.scorer_name.clone(),
        alpha: Some(ds.alpha),
        control_name: Some(ds.control_name.clone()),
    }
}

/// Where the blackbox scores come from.
#[derive(Debug, Clone, Copy)]
pub enum ScoreSource<'a> {
    /// One of the implemented scorers.
    Builtin(Scorer),
    /// Externally produced scores (already aligned with the corpus).
    External(&'a ScoreVector),
}

impl ScoreSource<'_> {
    fn resolve(&self, corpus: &Corpus, store: &EmbeddingStore) -> Result<ScoreVector> {
        match self {
            ScoreSource::Builtin(scorer) => scorer.score(corpus, Some(store)),
            ScoreSource::External(scores) => {
                if scores.len() != corpus.n() {
                    return Err(Error::invalid("external scores are not aligned with corpus"));
                }
                Ok((*scores).clone())
            }
        }
    }
}

/// Full balanced pipeline: score, normalize, blend against the control set
/// and select round-robin. With `alpha = 0.5` this is the "balanced" variant
/// of the blackbox scorer.
pub fn balanced_pipeline(
    corpus: &Corpus,
    store: &EmbeddingStore,
    source: ScoreSource,
    control: &ControlSet,
    alpha: f64,
    m: usize,
) -> Result<Summary> {
    let raw = source.resolve(corpus, store)?;
    let normalized = normalize_scores(&raw);
    let ds = build_ds_matrix(&normalized, control, corpus, store, alpha)?;
    Ok(diversify_select(&ds, m))
}
