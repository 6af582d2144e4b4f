//! Blackbox importance scorers and plain selection rules.
//!
//! Every scorer returns a [`ScoreVector`] aligned with corpus order; the
//! selection rules turn scores into an ordered [`Summary`]. Ties are broken
//! everywhere by higher score first, then ascending post id.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::embeddings::{corpus_sentence_vectors, cosine, EmbeddingStore};
use crate::error::{Error, Result};

/// Similarity threshold above which the centroid selector discards a
/// candidate as redundant.
pub const CENTROID_REDUNDANCY_THRESHOLD: f64 = 0.95;

/// Damping factor used by the graph scorers.
pub const PAGERANK_DAMPING: f64 = 0.85;
/// Convergence tolerance (L1) used by the graph scorers.
pub const PAGERANK_TOL: f64 = 1e-8;
/// Iteration cap used by the graph scorers.
pub const PAGERANK_MAX_ITER: usize = 200;

/// Per-post importance scores from one scorer.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    scores: Vec<f64>,
    scorer_name: String,
    normalized: bool,
}

impl ScoreVector {
    /// Wraps raw (unnormalized) scores; every entry must be finite.
    pub fn new(scores: Vec<f64>, scorer_name: impl Into<String>) -> Result<ScoreVector> {
        if let Some(pos) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::invalid(format!(
                "score at position {pos} is not finite"
            )));
        }
        Ok(ScoreVector {
            scores,
            scorer_name: scorer_name.into(),
            normalized: false,
        })
    }

    fn raw(scores: Vec<f64>, scorer_name: &str) -> ScoreVector {
        debug_assert!(scores.iter().all(|s| s.is_finite()));
        ScoreVector {
            scores,
            scorer_name: scorer_name.to_string(),
            normalized: false,
        }
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scorer_name(&self) -> &str {
        &self.scorer_name
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }
}

/// Min-max rescales scores to `[0, 1]`; a constant vector maps to all 0.5.
pub fn normalize_scores(scores: &ScoreVector) -> ScoreVector {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &s in &scores.scores {
        lo = lo.min(s);
        hi = hi.max(s);
    }
    let rescaled = if scores.scores.is_empty() {
        Vec::new()
    } else if hi > lo {
        scores.scores.iter().map(|&s| (s - lo) / (hi - lo)).collect()
    } else {
        vec![0.5; scores.scores.len()]
    };
    ScoreVector {
        scores: rescaled,
        scorer_name: scores.scorer_name.clone(),
        normalized: true,
    }
}

/// Ordered selection of posts with selection scores and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub entries: Vec<SummaryEntry>,
    /// Requested summary size (entries may be fewer on small corpora).
    pub m: usize,
    pub scorer_name: String,
    pub alpha: Option<f64>,
    pub control_name: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryEntry {
    pub id: String,
    pub score: f64,
}

impl Summary {
    pub fn ids(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.id.as_str()).collect()
    }

    /// Concatenated token sequence of the selected posts, in rank order.
    pub fn tokens(&self, corpus: &Corpus) -> Result<Vec<String>> {
        let mut out = Vec::new();
        for entry in &self.entries {
            let idx = corpus
                .index_of(&entry.id)
                .ok_or_else(|| Error::UnknownId(entry.id.clone()))?;
            out.extend(corpus.post(idx).tokens.iter().cloned());
        }
        Ok(out)
    }

    /// Expands into the serializable document form with post texts.
    pub fn to_doc(&self, corpus: &Corpus) -> Result<SummaryDoc> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for (rank, entry) in self.entries.iter().enumerate() {
            let idx = corpus
                .index_of(&entry.id)
                .ok_or_else(|| Error::UnknownId(entry.id.clone()))?;
            entries.push(SummaryDocEntry {
                id: entry.id.clone(),
                text: corpus.post(idx).text.clone(),
                score: entry.score,
                rank: rank + 1,
            });
        }
        Ok(SummaryDoc {
            scorer: self.scorer_name.clone(),
            alpha: self.alpha,
            control_set: self.control_name.clone(),
            m: self.m,
            entries,
        })
    }
}

/// JSON document form of a summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryDoc {
    pub scorer: String,
    pub alpha: Option<f64>,
    pub control_set: Option<String>,
    pub m: usize,
    pub entries: Vec<SummaryDocEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryDocEntry {
    pub id: String,
    pub text: String,
    pub score: f64,
    pub rank: usize,
}

/// The implemented blackbox scorers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scorer {
    Tfidf,
    HybridTfidf,
    LexRank,
    TextRank,
    Centroid,
}

impl Scorer {
    pub const ALL: [Scorer; 5] = [
        Scorer::Tfidf,
        Scorer::HybridTfidf,
        Scorer::LexRank,
        Scorer::TextRank,
        Scorer::Centroid,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scorer::Tfidf => "tfidf",
            Scorer::HybridTfidf => "hybrid-tfidf",
            Scorer::LexRank => "lexrank",
            Scorer::TextRank => "textrank",
            Scorer::Centroid => "centroid",
        }
    }

    /// True when scoring needs word vectors.
    pub fn needs_embeddings(&self) -> bool {
        matches!(self, Scorer::Centroid)
    }

    /// Runs the scorer; `store` is required only for [`Scorer::Centroid`].
    pub fn score(&self, corpus: &Corpus, store: Option<&EmbeddingStore>) -> Result<ScoreVector> {
        match self {
            Scorer::Tfidf => Ok(score_tfidf(corpus)),
            Scorer::HybridTfidf => Ok(score_hybrid_tfidf(corpus)),
            Scorer::LexRank => Ok(score_lexrank(corpus)),
            Scorer::TextRank => Ok(score_textrank(corpus)),
            Scorer::Centroid => {
                let store = store
                    .ok_or_else(|| Error::invalid("centroid scorer requires embeddings"))?;
                Ok(score_centroid(corpus, store))
            }
        }
    }
}

impl FromStr for Scorer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Scorer> {
        match s {
            "tfidf" => Ok(Scorer::Tfidf),
            "hybrid-tfidf" => Ok(Scorer::HybridTfidf),
            "lexrank" => Ok(Scorer::LexRank),
            "textrank" => Ok(Scorer::TextRank),
            "centroid" => Ok(Scorer::Centroid),
            other => Err(Error::invalid(format!("unknown scorer `{other}`"))),
        }
    }
}

/// Mean over the post's distinct tokens of `tf(w,x) * ln(n / df(w))`.
pub fn score_tfidf(corpus: &Corpus) -> ScoreVector {
    let n = corpus.n() as f64;
    let scores = (0..corpus.n())
        .map(|i| {
            let row = corpus.tf_doc(i);
            if row.is_empty() {
                return 0.0;
            }
            let sum: f64 = row
                .iter()
                .map(|&(vid, count)| count as f64 * (n / corpus.df_by_id(vid) as f64).ln())
                .sum();
            sum / row.len() as f64
        })
        .collect();
    ScoreVector::raw(scores, "tfidf")
}

/// Like [`score_tfidf`] but with the corpus-wide count `tf(w,S)` in place of
/// the per-post count, treating the whole collection as one document.
pub fn score_hybrid_tfidf(corpus: &Corpus) -> ScoreVector {
    let n = corpus.n() as f64;
    let scores = (0..corpus.n())
        .map(|i| {
            let row = corpus.tf_doc(i);
            if row.is_empty() {
                return 0.0;
            }
            let sum: f64 = row
                .iter()
                .map(|&(vid, _)| {
                    corpus.tf_corpus_by_id(vid) as f64 * (n / corpus.df_by_id(vid) as f64).ln()
                })
                .sum();
            sum / row.len() as f64
        })
        .collect();
    ScoreVector::raw(scores, "hybrid-tfidf")
}

/// Stationary distribution of the damped row-normalized walk over a
/// nonnegative weight matrix. Rows with zero mass spread uniformly.
/// Iteration stops when the L1 change drops below `tol` or after
/// `max_iter` rounds; the result sums to 1.
pub fn pagerank(
    weights: &[Vec<f64>],
    damping: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let n = weights.len();
    if n == 0 {
        return Err(Error::invalid("pagerank requires at least one node"));
    }
    if !(0.0 < damping && damping < 1.0) {
        return Err(Error::invalid("damping must lie strictly between 0 and 1"));
    }
    for (i, row) in weights.iter().enumerate() {
        if row.len() != n {
            return Err(Error::invalid(format!(
                "weight matrix is not square: row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        if let Some(j) = row.iter().position(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::invalid(format!(
                "negative or non-finite weight at ({i}, {j})"
            )));
        }
    }

    let nf = n as f64;
    let row_sum: Vec<f64> = weights.iter().map(|row| row.iter().sum()).collect();
    let mut p = vec![1.0 / nf; n];
    for _ in 0..max_iter {
        let mut next = vec![(1.0 - damping) / nf; n];
        let mut dangling = 0.0;
        for i in 0..n {
            if row_sum[i] <= 0.0 {
                dangling += p[i];
                continue;
            }
            let share = damping * p[i] / row_sum[i];
            for (j, &w) in weights[i].iter().enumerate() {
                if w > 0.0 {
                    next[j] += share * w;
                }
            }
        }
        if dangling > 0.0 {
            let spread = damping * dangling / nf;
            for slot in &mut next {
                *slot += spread;
            }
        }
        let delta: f64 = p.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        p = next;
        if delta < tol {
            break;
        }
    }
    let total: f64 = p.iter().sum();
    if total > 0.0 {
        for slot in &mut p {
            *slot /= total;
        }
    }
    Ok(p)
}

/// Sparse TF-IDF bag vector of one post: `(vocab id, tf * ln(n/df))`.
fn tfidf_bag(corpus: &Corpus, idx: usize) -> Vec<(u32, f64)> {
    let n = corpus.n() as f64;
    corpus
        .tf_doc(idx)
        .iter()
        .map(|&(vid, count)| (vid, count as f64 * (n / corpus.df_by_id(vid) as f64).ln()))
        .collect()
}

/// Cosine between two sparse vectors sorted by index.
fn sparse_cosine(a: &[(u32, f64)], b: &[(u32, f64)]) -> f64 {
    let mut dot = 0.0;
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                dot += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    let na: f64 = a.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt();
    let denom = na * nb;
    if denom == 0.0 {
        0.0
    } else {
        dot / denom
    }
}

/// Graph centrality over cosine similarities of TF-IDF bag vectors.
pub fn score_lexrank(corpus: &Corpus) -> ScoreVector {
    let n = corpus.n();
    if n == 0 {
        return ScoreVector::raw(Vec::new(), "lexrank");
    }
    let bags: Vec<Vec<(u32, f64)>> = (0..n).map(|i| tfidf_bag(corpus, i)).collect();
    let mut weights = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let sim = sparse_cosine(&bags[i], &bags[j]).clamp(0.0, 1.0);
            weights[i][j] = sim;
            weights[j][i] = sim;
        }
    }
    let scores = pagerank(&weights, PAGERANK_DAMPING, PAGERANK_TOL, PAGERANK_MAX_ITER)
        .expect("similarity weights are nonnegative");
    ScoreVector::raw(scores, "lexrank")
}

/// Graph centrality over word-overlap similarity
/// `|W(x1) ∩ W(x2)| / (ln|W(x1)| + ln|W(x2)|)` with a denominator floor of 1
/// so single-token posts stay well-defined.
pub fn score_textrank(corpus: &Corpus) -> ScoreVector {
    let n = corpus.n();
    if n == 0 {
        return ScoreVector::raw(Vec::new(), "textrank");
    }
    // Distinct vocab ids per post; tf_doc rows are already sorted + distinct.
    let sets: Vec<Vec<u32>> = (0..n)
        .map(|i| corpus.tf_doc(i).iter().map(|&(vid, _)| vid).collect())
        .collect();
    let mut weights = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let inter = sorted_intersection_len(&sets[i], &sets[j]);
            if inter == 0 {
                continue;
            }
            let denom = (sets[i].len().max(1) as f64).ln() + (sets[j].len().max(1) as f64).ln();
            let w = inter as f64 / denom.max(1.0);
            weights[i][j] = w;
            weights[j][i] = w;
        }
    }
    let scores = pagerank(&weights, PAGERANK_DAMPING, PAGERANK_TOL, PAGERANK_MAX_ITER)
        .expect("overlap weights are nonnegative");
    ScoreVector::raw(scores, "textrank")
}

fn sorted_intersection_len(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Cosine similarity of each post's sentence vector to the corpus centroid.
pub fn score_centroid(corpus: &Corpus, store: &EmbeddingStore) -> ScoreVector {
    let n = corpus.n();
    if n == 0 {
        return ScoreVector::raw(Vec::new(), "centroid");
    }
    let vectors = corpus_sentence_vectors(corpus, store);
    let dim = store.dim();
    let mut centroid = vec![0.0; dim];
    for v in &vectors {
        for (slot, &x) in centroid.iter_mut().zip(v.values()) {
            *slot += x;
        }
    }
    for slot in &mut centroid {
        *slot /= n as f64;
    }
    let scores = vectors
        .iter()
        .map(|v| cosine(v.values(), &centroid))
        .collect();
    ScoreVector::raw(scores, "centroid")
}

/// Indices of all posts ordered by score descending, post id ascending.
fn ranked_indices(scores: &[f64], corpus: &Corpus) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(Ordering::Equal)
            .then_with(|| corpus.post(a).id.cmp(&corpus.post(b).id))
    });
    idx
}

/// Takes the `min(m, n)` highest-scoring posts.
pub fn select_top_m(scores: &ScoreVector, corpus: &Corpus, m: usize) -> Summary {
    assert_eq!(scores.len(), corpus.n(), "scores are not aligned with corpus");
    let take = m.min(corpus.n());
    let entries = ranked_indices(scores.scores(), corpus)
        .into_iter()
        .take(take)
        .map(|i| SummaryEntry {
            id: corpus.post(i).id.clone(),
            score: scores.scores()[i],
        })
        .collect();
    Summary {
        entries,
        m,
        scorer_name: scores.scorer_name.clone(),
        alpha: None,
        control_name: None,
    }
}

/// Centroid selection with redundancy filtering: walk posts in descending
/// centroid score, discard a candidate whose similarity to any selected post
/// reaches [`CENTROID_REDUNDANCY_THRESHOLD`], and back-fill from the
/// discarded posts if the walk exhausts below `m`.
pub fn select_centroid(corpus: &Corpus, store: &EmbeddingStore, m: usize) -> Summary {
    let scores = score_centroid(corpus, store);
    let vectors = corpus_sentence_vectors(corpus, store);
    let order = ranked_indices(scores.scores(), corpus);
    let take = m.min(corpus.n());

    let mut selected: Vec<usize> = Vec::with_capacity(take);
    let mut skipped: Vec<usize> = Vec::new();
    for &cand in &order {
        if selected.len() == take {
            break;
        }
        let redundant = selected.iter().any(|&s| {
            cosine(vectors[cand].values(), vectors[s].values()) >= CENTROID_REDUNDANCY_THRESHOLD
        });
        if redundant {
            skipped.push(cand);
        } else {
            selected.push(cand);
        }
    }
    // Back-fill keeps |summary| = min(m, n); skipped is already in rank order.
    for &cand in &skipped {
        if selected.len() == take {
            break;
        }
        selected.push(cand);
    }

    let entries = selected
        .into_iter()
        .map(|i| SummaryEntry {
            id: corpus.post(i).id.clone(),
            score: scores.scores()[i],
        })
        .collect();
    Summary {
        entries,
        m,
        scorer_name: "centroid".to_string(),
        alpha: None,
        control_name: None,
    }
}

/// Greedy maximal-marginal-relevance selection:
/// `lambda * score(x) - (1 - lambda) * max similarity to the selected set`.
/// Scores must already be normalized so both terms share a scale.
pub fn select_mmr(
    scores: &ScoreVector,
    corpus: &Corpus,
    store: &EmbeddingStore,
    lambda: f64,
    m: usize,
) -> Summary {
    assert_eq!(scores.len(), corpus.n(), "scores are not aligned with corpus");
    assert!((0.0..=1.0).contains(&lambda), "lambda must lie in [0, 1]");
    debug_assert!(scores.is_normalized(), "MMR expects normalized scores");

    let vectors = corpus_sentence_vectors(corpus, store);
    let take = m.min(corpus.n());
    let mut selected: Vec<usize> = Vec::with_capacity(take);
    let mut picked = vec![false; corpus.n()];
    let mut entries = Vec::with_capacity(take);

    while entries.len() < take {
        let mut best: Option<(usize, f64)> = None;
        for cand in 0..corpus.n() {
            if picked[cand] {
                continue;
            }
            // The first pick is the pure argmax of the importance score;
            // later picks trade importance against the selected set.
            let value = if selected.is_empty() {
                scores.scores()[cand]
            } else {
                let max_sim = selected
                    .iter()
                    .map(|&s| cosine(vectors[cand].values(), vectors[s].values()))
                    .fold(0.0, f64::max);
                lambda * scores.scores()[cand] - (1.0 - lambda) * max_sim
            };
            let better = match best {
                None => true,
                Some((b, bv)) => {
                    value > bv
                        || (value == bv && corpus.post(cand).id < corpus.post(b).id)
                }
            };
            if better {
                best = Some((cand, value));
            }
        }
        let (idx, value) = best.expect("candidates remain while entries < take");
        picked[idx] = true;
        selected.push(idx);
        entries.push(SummaryEntry {
            id: corpus.post(idx).id.clone(),
            score: value,
        });
    }

    Summary {
        entries,
        m,
        scorer_name: "mmr".to_string(),
        alpha: None,
        control_name: None,
    }
}

#[derive(Debug, Deserialize)]
struct ScoreRecord {
    id: String,
    score: f64,
}

/// Reads externally produced scores (JSONL of `{"id", "score"}`) and aligns
/// them with corpus order. Every corpus id must be covered exactly once.
pub fn load_external_scores(reader: impl BufRead, corpus: &Corpus) -> Result<ScoreVector> {
    let mut by_id: HashMap<String, f64> = HashMap::with_capacity(corpus.n());
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ScoreRecord = serde_json::from_str(&line)
            .map_err(|e| Error::malformed(lineno + 1, e.to_string()))?;
        if !record.score.is_finite() {
            return Err(Error::malformed(
                lineno + 1,
                format!("non-finite score for id `{}`", record.id),
            ));
        }
        if corpus.index_of(&record.id).is_none() {
            return Err(Error::UnknownId(record.id));
        }
        if by_id.insert(record.id.clone(), record.score).is_some() {
            return Err(Error::DuplicateId(record.id));
        }
    }
    let mut scores = Vec::with_capacity(corpus.n());
    for post in corpus.posts() {
        match by_id.get(&post.id) {
            Some(&s) => scores.push(s),
            None => return Err(Error::MissingId(post.id.clone())),
        }
    }
    Ok(ScoreVector::raw(scores, "external"))
}
