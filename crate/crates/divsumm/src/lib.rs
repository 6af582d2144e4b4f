//! Extractive summarization of short social-media posts with diversity
//! control sets.
//!
//! The crate covers the full pipeline:
//!
//! - [`corpus`]: post normalization, tokenization and frequency statistics;
//! - [`embeddings`]: word2vec text-format loading, SIF sentence vectors and
//!   cosine similarity;
//! - [`summarizers`]: TF-IDF, Hybrid TF-IDF, LexRank, TextRank and
//!   centroid-embedding scorers plus top-m / MMR / centroid selection;
//! - [`diversify`]: blending blackbox scores with similarity to a small
//!   labeled control set and selecting round-robin, so summaries mirror the
//!   control set's composition without labels on the collection itself;
//! - [`controlset`]: picking a good control set from a labeled pool by
//!   cross-validated AUC / V-measure;
//! - [`evaluation`]: ROUGE-1 / ROUGE-L and per-label diversity reports.

pub mod controlset;
pub mod corpus;
pub mod diversify;
pub mod embeddings;
mod error;
pub mod evaluation;
pub mod summarizers;

pub use controlset::{
    auc, predict_dialect, select_control_set, v_measure, ControlSetReport, LabeledPool,
};
pub use corpus::{normalize_post, tokenize, Corpus, CorpusFormat, Post, MENTION_TOKEN};
pub use diversify::{
    balanced_pipeline, build_ds_matrix, diversify_select, ControlSet, DsMatrix, ScoreSource,
    DEFAULT_ALPHA,
};
pub use embeddings::{
    sentence_vector, similarity, EmbeddingStore, SentenceVector, DEFAULT_SIF_A,
};
pub use error::{Error, Result};
pub use evaluation::{
    dialect_fraction, rouge1, rouge_l, rouge_multi, rouge_scores, DiversityReport, LabelKey,
    RougeScores,
};
pub use summarizers::{
    load_external_scores, normalize_scores, pagerank, score_centroid, score_hybrid_tfidf,
    score_lexrank, score_textrank, score_tfidf, select_centroid, select_mmr, select_top_m,
    ScoreVector, Scorer, Summary, SummaryDoc,
};
