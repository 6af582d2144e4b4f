//! Word vectors, SIF-weighted sentence vectors and cosine similarity.

use std::collections::HashMap;
use std::io::BufRead;
use std::sync::Arc;

use crate::corpus::{Corpus, Post};
use crate::error::{Error, Result};

/// Default smoothing constant for smooth-inverse-frequency weights.
pub const DEFAULT_SIF_A: f64 = 1e-3;

/// Pre-trained word vectors plus per-token relative frequencies.
///
/// The vector table is shared, so deriving a store with fresh word
/// probabilities via [`EmbeddingStore::with_corpus_probs`] is cheap.
#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    dim: usize,
    vectors: Arc<HashMap<String, Vec<f64>>>,
    word_prob: HashMap<String, f64>,
}

impl EmbeddingStore {
    /// Parses the word2vec text format: a `<count> <dim>` header line
    /// followed by one `token v1 .. vdim` line per word.
    pub fn from_text(reader: impl BufRead) -> Result<EmbeddingStore> {
        let mut lines = reader.lines();
        let header = loop {
            match lines.next() {
                Some(line) => {
                    let line = line?;
                    if !line.trim().is_empty() {
                        break line;
                    }
                }
                None => return Err(Error::invalid("empty embedding stream")),
            }
        };
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::malformed(1, "expected `<count> <dim>` header"));
        }
        let count: usize = fields[0]
            .parse()
            .map_err(|_| Error::malformed(1, format!("bad vector count `{}`", fields[0])))?;
        let dim: usize = fields[1]
            .parse()
            .map_err(|_| Error::malformed(1, format!("bad dimension `{}`", fields[1])))?;
        if dim == 0 {
            return Err(Error::malformed(1, "dimension must be positive"));
        }

        let mut vectors: HashMap<String, Vec<f64>> = HashMap::with_capacity(count);
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let token = parts
                .next()
                .ok_or_else(|| Error::malformed(lineno + 2, "missing token"))?
                .to_string();
            let mut values = Vec::with_capacity(dim);
            for part in parts {
                let v: f64 = part.parse().map_err(|_| {
                    Error::malformed(lineno + 2, format!("token `{token}`: non-numeric entry `{part}`"))
                })?;
                if !v.is_finite() {
                    return Err(Error::malformed(
                        lineno + 2,
                        format!("token `{token}`: non-finite entry `{part}`"),
                    ));
                }
                values.push(v);
            }
            if values.len() != dim {
                return Err(Error::DimensionMismatch {
                    token,
                    expected: dim,
                    found: values.len(),
                });
            }
            vectors.insert(token, values);
        }
        if vectors.is_empty() {
            return Err(Error::invalid("embedding stream contains no vectors"));
        }
        Ok(EmbeddingStore {
            dim,
            vectors: Arc::new(vectors),
            word_prob: HashMap::new(),
        })
    }

    /// Returns a store whose word probabilities are the relative token
    /// frequencies of `corpus`. The vector table is shared, not copied.
    pub fn with_corpus_probs(&self, corpus: &Corpus) -> EmbeddingStore {
        let word_prob = corpus
            .word_probabilities()
            .into_iter()
            .map(|(tok, p)| (tok.to_string(), p))
            .collect();
        EmbeddingStore {
            dim: self.dim,
            vectors: Arc::clone(&self.vectors),
            word_prob,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored word vectors.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.vectors.contains_key(token)
    }

    /// Relative frequency p(w); unknown tokens report 0, which gives them
    /// the maximal SIF weight.
    pub fn word_prob(&self, token: &str) -> f64 {
        self.word_prob.get(token).copied().unwrap_or(0.0)
    }
}

/// Dense sentence vector produced by SIF aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceVector {
    values: Vec<f64>,
    is_zero: bool,
}

impl SentenceVector {
    /// Wraps raw values, deriving the zero flag.
    pub fn from_values(values: Vec<f64>) -> SentenceVector {
        let is_zero = values.iter().all(|&v| v == 0.0);
        SentenceVector { values, is_zero }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// True when the vector is exactly zero (e.g. every token was
    /// out-of-vocabulary).
    pub fn is_zero(&self) -> bool {
        self.is_zero
    }
}

/// Computes the SIF-weighted average of the post's word vectors:
/// each in-vocabulary token contributes `a / (a + p(w)) * vec(w)` and the
/// sum is divided by the number of in-vocabulary tokens. Tokens without a
/// vector are skipped; if none remain the zero vector is returned.
pub fn sentence_vector(post: &Post, store: &EmbeddingStore, a: f64) -> SentenceVector {
    assert!(a > 0.0, "SIF smoothing constant must be positive");
    let mut acc = vec![0.0; store.dim()];
    let mut hits = 0usize;
    for tok in &post.tokens {
        if let Some(vec) = store.vector(tok) {
            let w = a / (a + store.word_prob(tok));
            for (slot, v) in acc.iter_mut().zip(vec) {
                *slot += w * v;
            }
            hits += 1;
        }
    }
    if hits > 0 {
        let inv = 1.0 / hits as f64;
        for slot in &mut acc {
            *slot *= inv;
        }
    }
    SentenceVector::from_values(acc)
}

/// Cosine over equal-length slices; zero-norm operands yield 0.
pub(crate) fn cosine(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    let denom = na.sqrt() * nb.sqrt();
    if denom == 0.0 {
        0.0
    } else {
        dot / denom
    }
}

/// Cosine similarity between two sentence vectors; 0 when either is the
/// zero vector. Errors on dimension mismatch.
pub fn similarity(u: &SentenceVector, v: &SentenceVector) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::invalid(format!(
            "similarity: dimension mismatch ({} vs {})",
            u.dim(),
            v.dim()
        )));
    }
    Ok(cosine(u.values(), v.values()))
}

/// Sentence vectors for every post of a corpus, with word probabilities
/// estimated from that corpus.
pub(crate) fn corpus_sentence_vectors(corpus: &Corpus, store: &EmbeddingStore) -> Vec<SentenceVector> {
    let store = store.with_corpus_probs(corpus);
    corpus
        .posts()
        .iter()
        .map(|p| sentence_vector(p, &store, DEFAULT_SIF_A))
        .collect()
}

/// Removes the first principal component from a set of sentence vectors,
/// the optional post-hoc step of the SIF method. Off by default everywhere;
/// call explicitly when wanted.
pub fn remove_first_component(vectors: &mut [SentenceVector]) {
    let dim = match vectors.first() {
        Some(v) => v.dim(),
        None => return,
    };
    if vectors.iter().all(|v| v.is_zero()) {
        return;
    }

    // Power iteration on X^T X for the dominant right singular vector,
    // started from the axis with the largest column norm.
    let mut col_norms = vec![0.0; dim];
    for v in vectors.iter() {
        for (i, &x) in v.values().iter().enumerate() {
            col_norms[i] += x * x;
        }
    }
    let start = col_norms
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut u = vec![0.0; dim];
    u[start] = 1.0;

    for _ in 0..200 {
        let mut next = vec![0.0; dim];
        for v in vectors.iter() {
            let proj: f64 = v.values().iter().zip(&u).map(|(x, y)| x * y).sum();
            for (slot, &x) in next.iter_mut().zip(v.values()) {
                *slot += proj * x;
            }
        }
        let norm: f64 = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return;
        }
        for slot in &mut next {
            *slot /= norm;
        }
        let delta: f64 = next.iter().zip(&u).map(|(a, b)| (a - b).abs()).sum();
        u = next;
        if delta < 1e-12 {
            break;
        }
    }

    for v in vectors.iter_mut() {
        let proj: f64 = v.values().iter().zip(&u).map(|(x, y)| x * y).sum();
        let values: Vec<f64> = v
            .values()
            .iter()
            .zip(&u)
            .map(|(x, y)| x - proj * y)
            .collect();
        *v = SentenceVector::from_values(values);
    }
}
