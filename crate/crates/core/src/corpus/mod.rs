//! Corpus ingestion, vocabularies and training-pair generation.

mod noise;
mod pairs;
mod tokenize;
mod vocab;

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use noise::{noise_distribution, NoiseDistribution};
pub use pairs::{
    generate_pairs, sample_negatives, stream_rng, stream_seed, subsample_keep_prob, Label,
    NegativeRatio, TrainingPair,
};
pub use tokenize::tokenize;
pub use vocab::{
    build_slice_vocab, merge_global_vocab, GlobalIndex, LocalIndex, SliceVocabulary,
    VocabularyIndex,
};

/// Label of one corpus slice ("nyt-1995", "tg", ...).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SliceId(String);

impl SliceId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::InvalidInput("slice id must not be empty".into()));
        }
        if id.contains(['\t', '\n', '\r']) {
            return Err(Error::InvalidInput(format!(
                "slice id {id:?} contains a tab or newline"
            )));
        }
        Ok(SliceId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for SliceId {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        SliceId::new(value)
    }
}

impl std::str::FromStr for SliceId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SliceId::new(s)
    }
}

impl From<SliceId> for String {
    fn from(id: SliceId) -> String {
        id.0
    }
}

impl fmt::Display for SliceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Tokenized documents of one slice, in input order.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceCorpus {
    pub slice: SliceId,
    pub documents: Vec<Vec<String>>,
}

impl SliceCorpus {
    pub fn new(slice: SliceId) -> Self {
        SliceCorpus {
            slice,
            documents: Vec::new(),
        }
    }

    /// Tokenizes `text` and appends it as one document. Documents that
    /// tokenize to nothing are dropped.
    pub fn push_text(&mut self, text: &str) {
        let tokens = tokenize(text);
        if !tokens.is_empty() {
            self.documents.push(tokens);
        }
    }

    pub fn num_tokens(&self) -> usize {
        self.documents.iter().map(Vec::len).sum()
    }
}

#[derive(Deserialize)]
struct JsonLine {
    slice: String,
    text: String,
}

/// Reads a JSON-lines corpus where every line is
/// `{"slice": "<id>", "text": "<raw text>"}`. Slices are returned sorted by
/// id; blank lines are skipped.
pub fn read_jsonl(path: impl AsRef<Path>) -> Result<Vec<SliceCorpus>> {
    let mut slices = BTreeMap::new();
    read_jsonl_into(path.as_ref(), &mut slices)?;
    Ok(slices.into_values().collect())
}

fn read_jsonl_into(path: &Path, slices: &mut BTreeMap<SliceId, SliceCorpus>) -> Result<()> {
    let file = File::open(path).map_err(|e| Error::file(path, e))?;
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::file(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: JsonLine = serde_json::from_str(&line).map_err(|e| {
            Error::format(
                "corpus line",
                format!("{}:{}: {e}", path.display(), lineno + 1),
            )
        })?;
        let id = SliceId::new(record.slice)?;
        slices
            .entry(id.clone())
            .or_insert_with(|| SliceCorpus::new(id))
            .push_text(&record.text);
    }
    Ok(())
}

/// Reads a plain-text slice file: every non-blank line is one document.
pub fn read_plain_text(slice: SliceId, path: impl AsRef<Path>) -> Result<SliceCorpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::file(path, e))?;
    let mut corpus = SliceCorpus::new(slice);
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::file(path, e))?;
        corpus.push_text(&line);
    }
    Ok(corpus)
}

/// Loads every JSON-lines file and plain-text slice file, merging documents
/// of the same slice. Result is sorted by slice id.
pub fn load_corpora<P: AsRef<Path>>(
    jsonl: &[P],
    slice_files: &[(SliceId, P)],
) -> Result<Vec<SliceCorpus>> {
    let mut slices = BTreeMap::new();
    for path in jsonl {
        read_jsonl_into(path.as_ref(), &mut slices)?;
    }
    for (id, path) in slice_files {
        let corpus = read_plain_text(id.clone(), path)?;
        slices
            .entry(id.clone())
            .or_insert_with(|| SliceCorpus::new(id.clone()))
            .documents
            .extend(corpus.documents);
    }
    Ok(slices.into_values().collect())
}
