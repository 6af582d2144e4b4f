//! Shared loading helpers and the usage/data error split.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::ValueEnum;
use divsumm::{ControlSet, Corpus, CorpusFormat, EmbeddingStore};

/// Usage errors exit 1, data errors exit 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn usage(msg: impl Into<String>) -> CliError {
        CliError::Usage(msg.into())
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

impl From<divsumm::Error> for CliError {
    fn from(e: divsumm::Error) -> Self {
        CliError::Data(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Jsonl,
    Plain,
}

impl From<FormatArg> for CorpusFormat {
    fn from(f: FormatArg) -> CorpusFormat {
        match f {
            FormatArg::Jsonl => CorpusFormat::Jsonl,
            FormatArg::Plain => CorpusFormat::Plain,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LabelKeyArg {
    Dialect,
    Group,
}

impl From<LabelKeyArg> for divsumm::LabelKey {
    fn from(k: LabelKeyArg) -> divsumm::LabelKey {
        match k {
            LabelKeyArg::Dialect => divsumm::LabelKey::Dialect,
            LabelKeyArg::Group => divsumm::LabelKey::Group,
        }
    }
}

pub fn open(path: &Path) -> CliResult<BufReader<File>> {
    let file = File::open(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(file))
}

pub fn load_corpus(path: &Path, format: FormatArg) -> CliResult<Corpus> {
    let corpus = Corpus::load(open(path)?, format.into())
        .map_err(|e| CliError::Data(anyhow::Error::new(e).context(format!("{}", path.display()))))?;
    Ok(corpus)
}

pub fn load_embeddings(path: &Path) -> CliResult<EmbeddingStore> {
    let store = EmbeddingStore::from_text(open(path)?)
        .map_err(|e| CliError::Data(anyhow::Error::new(e).context(format!("{}", path.display()))))?;
    Ok(store)
}

pub fn load_control_set(path: &Path) -> CliResult<ControlSet> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "control-set".to_string());
    let set = ControlSet::from_jsonl(name, open(path)?)
        .map_err(|e| CliError::Data(anyhow::Error::new(e).context(format!("{}", path.display()))))?;
    Ok(set)
}

/// Reads one reference summary into a flat token sequence. Plain files hold
/// one post per line; JSONL records need a `text` field. Texts run through
/// the same normalization as corpus posts.
pub fn load_reference_tokens(path: &Path, format: FormatArg) -> CliResult<Vec<String>> {
    #[derive(serde::Deserialize)]
    struct TextRecord {
        text: String,
    }

    let mut tokens = Vec::new();
    for (lineno, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| CliError::Data(e.into()))?;
        if line.trim().is_empty() {
            continue;
        }
        let text = match format {
            FormatArg::Plain => line,
            FormatArg::Jsonl => {
                let record: TextRecord = serde_json::from_str(&line).map_err(|e| {
                    CliError::Data(anyhow::anyhow!(
                        "{}: line {}: {e}",
                        path.display(),
                        lineno + 1
                    ))
                })?;
                record.text
            }
        };
        tokens.extend(divsumm::tokenize(&divsumm::normalize_post(&text)));
    }
    Ok(tokens)
}

/// Writes to the path when given, standard output otherwise.
pub fn write_output(output: Option<&PathBuf>, content: &str) -> CliResult<()> {
    match output {
        Some(path) => {
            let mut file = File::create(path)
                .with_context(|| format!("cannot create {}", path.display()))?;
            file.write_all(content.as_bytes())
                .with_context(|| format!("cannot write {}", path.display()))?;
        }
        None => {
            print!("{content}");
        }
    }
    Ok(())
}

pub fn to_pretty_json<T: serde::Serialize>(value: &T) -> CliResult<String> {
    let mut json = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Data(e.into()))?;
    json.push('\n');
    Ok(json)
}
