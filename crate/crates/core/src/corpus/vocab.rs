use std::collections::{HashMap, HashSet};
use std::io::{self, Write};

use super::{SliceCorpus, SliceId};
use crate::error::{Error, Result};

/// Position of a word within one slice vocabulary (0-based rank).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocalIndex(pub u32);

/// Position of a word within the global vocabulary (0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GlobalIndex(pub u32);

impl LocalIndex {
    pub fn get(self) -> usize {
        self.0 as usize
    }
}

impl GlobalIndex {
    pub fn get(self) -> usize {
        self.0 as usize
    }
}

/// Frequency-ranked vocabulary of one slice.
///
/// Words are ordered by descending count with ties broken
/// lexicographically; a word's local index is its rank.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceVocabulary {
    slice: SliceId,
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, LocalIndex>,
}

impl SliceVocabulary {
    /// Keeps the `max_size` most frequent entries of `counts`.
    pub fn from_counts(
        slice: SliceId,
        counts: impl IntoIterator<Item = (String, u64)>,
        max_size: usize,
    ) -> Result<Self> {
        if max_size == 0 {
            return Err(Error::InvalidConfig("slice vocabulary size must be >= 1".into()));
        }
        let mut ranked: Vec<(String, u64)> = counts.into_iter().filter(|(_, c)| *c > 0).collect();
        if ranked.is_empty() {
            return Err(Error::EmptySlice(slice.to_string()));
        }
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(max_size);
        Self::from_ranked(slice, ranked)
    }

    /// Builds a vocabulary from entries already in rank order.
    pub fn from_ranked(slice: SliceId, ranked: Vec<(String, u64)>) -> Result<Self> {
        if ranked.is_empty() {
            return Err(Error::EmptySlice(slice.to_string()));
        }
        if ranked.len() > u32::MAX as usize {
            return Err(Error::InvalidInput("slice vocabulary too large".into()));
        }
        let mut index = HashMap::with_capacity(ranked.len());
        let mut words = Vec::with_capacity(ranked.len());
        let mut counts = Vec::with_capacity(ranked.len());
        for (rank, (word, count)) in ranked.into_iter().enumerate() {
            if word.is_empty() {
                return Err(Error::InvalidInput("empty word in vocabulary".into()));
            }
            if index.insert(word.clone(), LocalIndex(rank as u32)).is_some() {
                return Err(Error::InvalidInput(format!(
                    "duplicate word {word:?} in vocabulary of slice {slice}"
                )));
            }
            words.push(word);
            counts.push(count);
        }
        Ok(SliceVocabulary {
            slice,
            words,
            counts,
            index,
        })
    }

    pub fn slice(&self) -> &SliceId {
        &self.slice
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Words in rank order.
    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Counts aligned with [`words`](Self::words).
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn word(&self, local: LocalIndex) -> &str {
        &self.words[local.get()]
    }

    pub fn count(&self, word: &str) -> Option<u64> {
        self.index.get(word).map(|i| self.counts[i.get()])
    }

    pub fn local_index(&self, word: &str) -> Option<LocalIndex> {
        self.index.get(word).copied()
    }

    /// Sum of the counts of all vocabulary words.
    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Writes `local_index<TAB>word<TAB>count` lines, indices 1-based.
    pub fn write_tsv(&self, mut out: impl Write) -> io::Result<()> {
        for (i, (word, count)) in self.words.iter().zip(&self.counts).enumerate() {
            writeln!(out, "{}\t{}\t{}", i + 1, word, count)?;
        }
        Ok(())
    }
}

/// Counts the tokens of `corpus` and keeps the `max_size` most frequent.
pub fn build_slice_vocab(corpus: &SliceCorpus, max_size: usize) -> Result<SliceVocabulary> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for token in corpus.documents.iter().flatten() {
        *counts.entry(token.as_str()).or_default() += 1;
    }
    SliceVocabulary::from_counts(
        corpus.slice.clone(),
        counts.into_iter().map(|(w, c)| (w.to_owned(), c)),
        max_size,
    )
}

/// Union of all slice vocabularies with the global and local indexings and
/// the local-to-global mapping of every slice.
#[derive(Clone, Debug, PartialEq)]
pub struct VocabularyIndex {
    words: Vec<String>,
    totals: Vec<u64>,
    lookup: HashMap<String, GlobalIndex>,
    slices: Vec<SliceVocabulary>,
    local_to_global: Vec<Vec<GlobalIndex>>,
    global_to_local: Vec<Vec<Option<LocalIndex>>>,
}

/// Merges slice vocabularies into the global index.
///
/// Slices are kept sorted by id. Global words are ordered by their count
/// summed over the slices that contain them (descending, ties
/// lexicographic).
pub fn merge_global_vocab(mut slice_vocabs: Vec<SliceVocabulary>) -> Result<VocabularyIndex> {
    if slice_vocabs.is_empty() {
        return Err(Error::InvalidInput("no slice vocabularies to merge".into()));
    }
    slice_vocabs.sort_by(|a, b| a.slice.cmp(&b.slice));
    if let Some(pair) = slice_vocabs.windows(2).find(|p| p[0].slice == p[1].slice) {
        return Err(Error::InvalidInput(format!("duplicate slice id {}", pair[0].slice)));
    }

    let mut totals: HashMap<&str, u64> = HashMap::new();
    for vocab in &slice_vocabs {
        for (word, count) in vocab.words.iter().zip(&vocab.counts) {
            *totals.entry(word.as_str()).or_default() += count;
        }
    }
    let mut ranked: Vec<(String, u64)> = totals.into_iter().map(|(w, c)| (w.to_owned(), c)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    VocabularyIndex::from_parts(ranked, slice_vocabs)
}

impl VocabularyIndex {
    /// Assembles an index from a global word list (in global order, with
    /// totals) and slice vocabularies sorted by id.
    pub(crate) fn from_parts(
        ranked: Vec<(String, u64)>,
        slices: Vec<SliceVocabulary>,
    ) -> Result<Self> {
        if ranked.len() > u32::MAX as usize {
            return Err(Error::InvalidInput("global vocabulary too large".into()));
        }
        let mut lookup = HashMap::with_capacity(ranked.len());
        let mut words = Vec::with_capacity(ranked.len());
        let mut totals = Vec::with_capacity(ranked.len());
        for (i, (word, total)) in ranked.into_iter().enumerate() {
            if lookup.insert(word.clone(), GlobalIndex(i as u32)).is_some() {
                return Err(Error::InvalidInput(format!("duplicate global word {word:?}")));
            }
            words.push(word);
            totals.push(total);
        }

        let mut local_to_global = Vec::with_capacity(slices.len());
        let mut global_to_local = Vec::with_capacity(slices.len());
        for vocab in &slices {
            let mut to_local = vec![None; words.len()];
            let mut to_global = Vec::with_capacity(vocab.len());
            for (local, word) in vocab.words.iter().enumerate() {
                let global = *lookup.get(word).ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "word {word:?} of slice {} missing from global vocabulary",
                        vocab.slice
                    ))
                })?;
                to_local[global.get()] = Some(LocalIndex(local as u32));
                to_global.push(global);
            }
            local_to_global.push(to_global);
            global_to_local.push(to_local);
        }

        let union: HashSet<&str> = slices.iter().flat_map(|v| v.words.iter().map(String::as_str)).collect();
        if union.len() != words.len() {
            return Err(Error::InvalidInput(
                "global vocabulary is not the union of the slice vocabularies".into(),
            ));
        }

        Ok(VocabularyIndex {
            words,
            totals,
            lookup,
            slices,
            local_to_global,
            global_to_local,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, global: GlobalIndex) -> &str {
        &self.words[global.get()]
    }

    pub fn total_count(&self, global: GlobalIndex) -> u64 {
        self.totals[global.get()]
    }

    pub fn index_of(&self, word: &str) -> Option<GlobalIndex> {
        self.lookup.get(word).copied()
    }

    pub fn num_slices(&self) -> usize {
        self.slices.len()
    }

    pub fn slices(&self) -> &[SliceVocabulary] {
        &self.slices
    }

    pub fn slice_ids(&self) -> impl Iterator<Item = &SliceId> {
        self.slices.iter().map(|v| &v.slice)
    }

    /// Position of `slice` in [`slices`](Self::slices).
    pub fn slice_position(&self, slice: &SliceId) -> Option<usize> {
        self.slices.binary_search_by(|v| v.slice.cmp(slice)).ok()
    }

    /// Maps a local index of slice `pos` to its global index.
    pub fn to_global(&self, pos: usize, local: LocalIndex) -> GlobalIndex {
        self.local_to_global[pos][local.get()]
    }

    /// Maps a global index to its local index in slice `pos`, if present.
    pub fn to_local(&self, pos: usize, global: GlobalIndex) -> Option<LocalIndex> {
        self.global_to_local[pos][global.get()]
    }

    pub fn contains(&self, pos: usize, global: GlobalIndex) -> bool {
        self.global_to_local[pos][global.get()].is_some()
    }

    /// Global indices of slice `pos` in local rank order.
    pub fn members(&self, pos: usize) -> &[GlobalIndex] {
        &self.local_to_global[pos]
    }

    /// Membership mask of slice `pos` over the global vocabulary.
    pub fn membership_mask(&self, pos: usize) -> Vec<bool> {
        self.global_to_local[pos].iter().map(Option::is_some).collect()
    }

    /// Writes `global_index<TAB>word<TAB>total_count` lines, indices 1-based.
    pub fn write_tsv(&self, mut out: impl Write) -> io::Result<()> {
        for (i, (word, total)) in self.words.iter().zip(&self.totals).enumerate() {
            writeln!(out, "{}\t{}\t{}", i + 1, word, total)?;
        }
        Ok(())
    }
}
