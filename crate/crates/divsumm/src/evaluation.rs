//! ROUGE-1 / ROUGE-L scoring and dialect-fraction reports.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::summarizers::Summary;

/// Recall / precision / F triple for one metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prf {
    pub recall: f64,
    pub precision: f64,
    pub f: f64,
}

fn prf(overlap: f64, reference_len: usize, candidate_len: usize) -> Prf {
    let recall = if reference_len == 0 {
        0.0
    } else {
        overlap / reference_len as f64
    };
    let precision = if candidate_len == 0 {
        0.0
    } else {
        overlap / candidate_len as f64
    };
    let f = if recall + precision == 0.0 {
        0.0
    } else {
        2.0 * recall * precision / (recall + precision)
    };
    Prf { recall, precision, f }
}

/// Unigram-overlap ROUGE-1. Overlap counts each token up to its multiplicity
/// in both sequences; an empty side zeroes the corresponding metric.
pub fn rouge1<S: AsRef<str>>(candidate: &[S], reference: &[S]) -> Prf {
    let mut cand_counts: HashMap<&str, u64> = HashMap::new();
    for tok in candidate {
        *cand_counts.entry(tok.as_ref()).or_insert(0) += 1;
    }
    let mut ref_counts: HashMap<&str, u64> = HashMap::new();
    for tok in reference {
        *ref_counts.entry(tok.as_ref()).or_insert(0) += 1;
    }
    let overlap: u64 = cand_counts
        .iter()
        .map(|(tok, &c)| c.min(*ref_counts.get(tok).unwrap_or(&0)))
        .sum();
    prf(overlap as f64, reference.len(), candidate.len())
}

/// Longest-common-subsequence length via the classic two-row DP.
fn lcs_len<S: AsRef<str>>(a: &[S], b: &[S]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut curr = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            curr[j + 1] = if x.as_ref() == y.as_ref() {
                prev[j] + 1
            } else {
                prev[j + 1].max(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// ROUGE-L over token sequences. For summary-level scoring, concatenate each
/// summary's posts in rank order before calling.
pub fn rouge_l<S: AsRef<str>>(candidate: &[S], reference: &[S]) -> Prf {
    let l = lcs_len(candidate, reference);
    prf(l as f64, reference.len(), candidate.len())
}

/// ROUGE-1 and ROUGE-L recall, precision and F for one candidate/reference
/// pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeScores {
    pub r1_recall: f64,
    pub r1_precision: f64,
    pub r1_f: f64,
    pub rl_recall: f64,
    pub rl_precision: f64,
    pub rl_f: f64,
}

/// Both ROUGE variants for one pair.
pub fn rouge_scores<S: AsRef<str>>(candidate: &[S], reference: &[S]) -> RougeScores {
    let r1 = rouge1(candidate, reference);
    let rl = rouge_l(candidate, reference);
    RougeScores {
        r1_recall: r1.recall,
        r1_precision: r1.precision,
        r1_f: r1.f,
        rl_recall: rl.recall,
        rl_precision: rl.precision,
        rl_f: rl.f,
    }
}

/// Arithmetic mean of the per-reference scores.
pub fn rouge_multi<S: AsRef<str>>(
    candidate: &[S],
    references: &[Vec<String>],
) -> Result<RougeScores> {
    if references.is_empty() {
        return Err(Error::invalid("rouge_multi needs at least one reference"));
    }
    let mut acc = RougeScores {
        r1_recall: 0.0,
        r1_precision: 0.0,
        r1_f: 0.0,
        rl_recall: 0.0,
        rl_precision: 0.0,
        rl_f: 0.0,
    };
    for reference in references {
        let cand: Vec<&str> = candidate.iter().map(AsRef::as_ref).collect();
        let refr: Vec<&str> = reference.iter().map(String::as_str).collect();
        let s = rouge_scores(&cand, &refr);
        acc.r1_recall += s.r1_recall;
        acc.r1_precision += s.r1_precision;
        acc.r1_f += s.r1_f;
        acc.rl_recall += s.rl_recall;
        acc.rl_precision += s.rl_precision;
        acc.rl_f += s.rl_f;
    }
    let k = references.len() as f64;
    acc.r1_recall /= k;
    acc.r1_precision /= k;
    acc.r1_f /= k;
    acc.rl_recall /= k;
    acc.rl_precision /= k;
    acc.rl_f /= k;
    Ok(acc)
}

/// Which per-post label a diversity report reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelKey {
    Dialect,
    Group,
}

impl LabelKey {
    pub fn name(&self) -> &'static str {
        match self {
            LabelKey::Dialect => "dialect",
            LabelKey::Group => "group",
        }
    }
}

/// Label composition of a summary against its source collection.
///
/// Fractions are over labeled posts only; posts without the chosen label are
/// counted separately and excluded from the denominator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiversityReport {
    pub label_key: String,
    /// Fraction of labeled summary posts per label.
    pub fractions: BTreeMap<String, f64>,
    /// Count of summary posts per label.
    pub counts: BTreeMap<String, usize>,
    /// Summary posts without the chosen label.
    pub unlabeled: usize,
    /// Fraction of labeled collection posts per label.
    pub baseline_fractions: BTreeMap<String, f64>,
    /// Collection posts without the chosen label.
    pub baseline_unlabeled: usize,
}

fn label_fractions<'a>(
    labels: impl Iterator<Item = Option<&'a str>>,
) -> (BTreeMap<String, f64>, BTreeMap<String, usize>, usize) {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut unlabeled = 0usize;
    for label in labels {
        match label {
            Some(l) => *counts.entry(l.to_string()).or_insert(0) += 1,
            None => unlabeled += 1,
        }
    }
    let labeled_total: usize = counts.values().sum();
    let fractions = counts
        .iter()
        .map(|(l, &c)| (l.clone(), c as f64 / labeled_total as f64))
        .collect();
    (fractions, counts, unlabeled)
}

/// Per-label composition of `summary` with the collection's composition as a
/// baseline. Errors if a summary id is not in the corpus.
pub fn dialect_fraction(
    summary: &Summary,
    corpus: &Corpus,
    key: LabelKey,
) -> Result<DiversityReport> {
    let pick = |idx: usize| -> Option<&str> {
        let post = corpus.post(idx);
        match key {
            LabelKey::Dialect => post.dialect.as_deref(),
            LabelKey::Group => post.group.as_deref(),
        }
    };

    let mut summary_labels = Vec::with_capacity(summary.entries.len());
    for entry in &summary.entries {
        let idx = corpus
            .index_of(&entry.id)
            .ok_or_else(|| Error::UnknownId(entry.id.clone()))?;
        summary_labels.push(pick(idx));
    }
    let (fractions, counts, unlabeled) = label_fractions(summary_labels.into_iter());
    let (baseline_fractions, _, baseline_unlabeled) =
        label_fractions((0..corpus.n()).map(pick));

    Ok(DiversityReport {
        label_key: key.name().to_string(),
        fractions,
        counts,
        unlabeled,
        baseline_fractions,
        baseline_unlabeled,
    })
}
