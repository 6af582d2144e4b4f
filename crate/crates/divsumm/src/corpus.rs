//! Post normalization, tokenization and corpus frequency statistics.
//!
//! A [`Corpus`] is an immutable, ordered collection of normalized posts
//! together with the term/document frequency tables every frequency-based
//! scorer reads from.

use std::collections::HashMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Literal token substituted for user mentions during normalization.
pub const MENTION_TOKEN: &str = "ATMENTION";

/// One normalized social-media post.
#[derive(Debug, Clone, PartialEq)]
pub struct Post {
    /// Opaque identifier, unique within a corpus.
    pub id: String,
    /// Original text as read from the source.
    pub raw_text: String,
    /// Normalized text; retokenizing it reproduces `tokens`.
    pub text: String,
    /// Tokenizer output of `text`, multiplicity preserved.
    pub tokens: Vec<String>,
    /// Optional dialect label.
    pub dialect: Option<String>,
    /// Optional group label (e.g. gender of the author).
    pub group: Option<String>,
}

impl Post {
    /// Builds a post by normalizing and tokenizing `raw_text`.
    pub fn new(
        id: impl Into<String>,
        raw_text: impl Into<String>,
        dialect: Option<String>,
        group: Option<String>,
    ) -> Post {
        let raw_text = raw_text.into();
        let text = normalize_post(&raw_text);
        let tokens = tokenize(&text);
        Post {
            id: id.into(),
            raw_text,
            text,
            tokens,
            dialect,
            group,
        }
    }

    /// Distinct tokens in first-occurrence order (the word set of the post).
    pub fn word_set(&self) -> Vec<&str> {
        let mut seen: Vec<&str> = Vec::with_capacity(self.tokens.len());
        for tok in &self.tokens {
            if !seen.contains(&tok.as_str()) {
                seen.push(tok);
            }
        }
        seen
    }
}

fn is_handle_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_url_token(lower: &str) -> bool {
    lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.")
}

/// Scrubs one lowercased whitespace token into `out`.
///
/// Keeps alphanumerics, a `#` that starts a hashtag and an apostrophe between
/// alphanumerics; rewrites `@handle` runs to the mention token; everything
/// else becomes a space.
fn scrub_token(token: &str, out: &mut String) {
    let chars: Vec<char> = token.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '@' && i + 1 < chars.len() && is_handle_char(chars[i + 1]) {
            i += 1;
            while i < chars.len() && is_handle_char(chars[i]) {
                i += 1;
            }
            out.push(' ');
            out.push_str(MENTION_TOKEN);
            out.push(' ');
            continue;
        }
        if c == '#' {
            let at_token_start = out.chars().last().is_none_or(|p| p == ' ');
            let next_alnum = chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
            out.push(if at_token_start && next_alnum { '#' } else { ' ' });
            i += 1;
            continue;
        }
        if c == '\'' {
            let prev_alnum = out.chars().last().is_some_and(|p| p.is_alphanumeric());
            let next_alnum = chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
            out.push(if prev_alnum && next_alnum { '\'' } else { ' ' });
            i += 1;
            continue;
        }
        if c.is_alphanumeric() {
            out.push(c);
        } else {
            out.push(' ');
        }
        i += 1;
    }
}

/// Normalizes raw post text: drops URL tokens, rewrites `@user` mentions to
/// [`MENTION_TOKEN`], lowercases, keeps hashtags intact, maps other special
/// characters to whitespace and collapses runs of whitespace.
///
/// Idempotent: normalizing already-normalized text is a no-op.
pub fn normalize_post(raw: &str) -> String {
    let mut scratch = String::with_capacity(raw.len());
    for raw_tok in raw.split_whitespace() {
        if raw_tok == MENTION_TOKEN {
            scratch.push_str(MENTION_TOKEN);
            scratch.push(' ');
            continue;
        }
        let lower = raw_tok.to_lowercase();
        if is_url_token(&lower) {
            continue;
        }
        scrub_token(&lower, &mut scratch);
        scratch.push(' ');
    }
    let pieces: Vec<&str> = scratch.split_whitespace().collect();
    pieces.join(" ")
}

/// Splits on whitespace and strips leading/trailing punctuation, keeping a
/// `#` prefix and the literal mention token. Empty tokens are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|piece| {
            if piece == MENTION_TOKEN {
                return Some(piece.to_string());
            }
            let trimmed = piece
                .trim_end_matches(|c: char| !c.is_alphanumeric())
                .trim_start_matches(|c: char| !c.is_alphanumeric() && c != '#');
            if trimmed.is_empty() {
                None
            } else {
                Some(trimmed.to_string())
            }
        })
        .collect()
}

/// Source encoding of a corpus stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// One JSON object per line: `{"id", "text", "dialect"?, "group"?}`.
    Jsonl,
    /// One post per line; ids are zero-based decimal strings.
    Plain,
}

#[derive(Debug, Deserialize, Serialize)]
struct PostRecord {
    id: String,
    text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dialect: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    group: Option<String>,
}

/// Immutable, ordered collection of posts plus frequency statistics.
#[derive(Debug, Clone)]
pub struct Corpus {
    posts: Vec<Post>,
    id_index: HashMap<String, usize>,
    vocab: Vec<String>,
    vocab_index: HashMap<String, u32>,
    /// Per-post term frequencies as (vocab id, count), sorted by vocab id.
    tf_doc: Vec<Vec<(u32, u32)>>,
    /// Corpus-wide term frequency per vocab id.
    tf_corpus: Vec<u64>,
    /// Number of posts containing each vocab id.
    df: Vec<u32>,
    total_tokens: u64,
}

impl Corpus {
    /// Builds a corpus from already-constructed posts.
    pub fn from_posts(posts: Vec<Post>) -> Result<Corpus> {
        let mut id_index = HashMap::with_capacity(posts.len());
        for (i, post) in posts.iter().enumerate() {
            if id_index.insert(post.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(post.id.clone()));
            }
        }

        let mut vocab: Vec<String> = Vec::new();
        let mut vocab_index: HashMap<String, u32> = HashMap::new();
        let mut tf_doc: Vec<Vec<(u32, u32)>> = Vec::with_capacity(posts.len());
        let mut tf_corpus: Vec<u64> = Vec::new();
        let mut df: Vec<u32> = Vec::new();
        let mut total_tokens = 0u64;

        for post in &posts {
            let mut counts: HashMap<u32, u32> = HashMap::new();
            for tok in &post.tokens {
                let vid = match vocab_index.get(tok) {
                    Some(&vid) => vid,
                    None => {
                        let vid = vocab.len() as u32;
                        vocab.push(tok.clone());
                        vocab_index.insert(tok.clone(), vid);
                        tf_corpus.push(0);
                        df.push(0);
                        vid
                    }
                };
                *counts.entry(vid).or_insert(0) += 1;
                tf_corpus[vid as usize] += 1;
                total_tokens += 1;
            }
            let mut row: Vec<(u32, u32)> = counts.into_iter().collect();
            row.sort_unstable_by_key(|&(vid, _)| vid);
            for &(vid, _) in &row {
                df[vid as usize] += 1;
            }
            tf_doc.push(row);
        }

        Ok(Corpus {
            posts,
            id_index,
            vocab,
            vocab_index,
            tf_doc,
            tf_corpus,
            df,
            total_tokens,
        })
    }

    /// Loads a corpus from a reader in the given format.
    pub fn load(reader: impl BufRead, format: CorpusFormat) -> Result<Corpus> {
        match format {
            CorpusFormat::Jsonl => Corpus::from_jsonl(reader),
            CorpusFormat::Plain => Corpus::from_plain(reader),
        }
    }

    /// Parses JSONL records; blank lines are skipped.
    pub fn from_jsonl(reader: impl BufRead) -> Result<Corpus> {
        let mut posts = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: PostRecord = serde_json::from_str(&line)
                .map_err(|e| Error::malformed(lineno + 1, e.to_string()))?;
            posts.push(Post::new(record.id, record.text, record.dialect, record.group));
        }
        Corpus::from_posts(posts)
    }

    /// Parses plain text, one post per line; ids count up from "0".
    pub fn from_plain(reader: impl BufRead) -> Result<Corpus> {
        let mut posts = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            posts.push(Post::new(lineno.to_string(), line, None, None));
        }
        Corpus::from_posts(posts)
    }

    /// Number of posts.
    pub fn n(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn post(&self, idx: usize) -> &Post {
        &self.posts[idx]
    }

    /// Position of a post id within the corpus.
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.id_index.get(id).copied()
    }

    /// Number of posts containing `token`.
    pub fn df(&self, token: &str) -> usize {
        self.vocab_index
            .get(token)
            .map_or(0, |&vid| self.df[vid as usize] as usize)
    }

    /// Corpus-wide count of `token`.
    pub fn tf_corpus(&self, token: &str) -> u64 {
        self.vocab_index
            .get(token)
            .map_or(0, |&vid| self.tf_corpus[vid as usize])
    }

    /// Term frequencies of one post as (vocab id, count), sorted by vocab id.
    pub fn tf_doc(&self, idx: usize) -> &[(u32, u32)] {
        &self.tf_doc[idx]
    }

    /// Vocabulary in first-appearance order.
    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn token(&self, vocab_id: u32) -> &str {
        &self.vocab[vocab_id as usize]
    }

    pub(crate) fn df_by_id(&self, vocab_id: u32) -> u32 {
        self.df[vocab_id as usize]
    }

    pub(crate) fn tf_corpus_by_id(&self, vocab_id: u32) -> u64 {
        self.tf_corpus[vocab_id as usize]
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Relative frequency of each vocabulary token, in vocab order.
    pub fn word_probabilities(&self) -> Vec<(&str, f64)> {
        if self.total_tokens == 0 {
            return Vec::new();
        }
        self.vocab
            .iter()
            .enumerate()
            .map(|(vid, tok)| {
                (
                    tok.as_str(),
                    self.tf_corpus[vid] as f64 / self.total_tokens as f64,
                )
            })
            .collect()
    }
}
