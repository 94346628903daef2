use std::collections::HashMap;

use crate::corpus::{GlobalIndex, SliceId};
use crate::error::{Error, Result};
use crate::model::{Side, TrainedModel};

/// Composed input vectors of one slice, for the words of its vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceSpace {
    id: SliceId,
    members: Vec<GlobalIndex>,
    rows: HashMap<GlobalIndex, usize>,
    vectors: Vec<f32>,
}

impl SliceSpace {
    pub fn new(id: SliceId, members: Vec<GlobalIndex>, vectors: Vec<f32>, dim: usize) -> Result<Self> {
        if vectors.len() != members.len() * dim {
            return Err(Error::InvalidInput(format!(
                "slice {id}: {} values for {} words of dimension {dim}",
                vectors.len(),
                members.len()
            )));
        }
        let mut rows = HashMap::with_capacity(members.len());
        for (i, &g) in members.iter().enumerate() {
            if rows.insert(g, i).is_some() {
                return Err(Error::InvalidInput(format!("slice {id}: duplicate word {}", g.0)));
            }
        }
        Ok(SliceSpace {
            id,
            members,
            rows,
            vectors,
        })
    }

    pub fn id(&self) -> &SliceId {
        &self.id
    }

    /// Words of the slice vocabulary in local rank order.
    pub fn members(&self) -> &[GlobalIndex] {
        &self.members
    }

    pub fn contains(&self, word: GlobalIndex) -> bool {
        self.rows.contains_key(&word)
    }

    /// Vectors in the order of [`members`](Self::members), flattened.
    pub fn vectors(&self) -> &[f32] {
        &self.vectors
    }
}

/// The composed input vectors `v[s, w]` of every slice plus the central
/// vectors, detached from training state. Every evaluation routine works
/// on this view, so it can come from a binary model or a text export.
#[derive(Clone, Debug, PartialEq)]
pub struct ComposedEmbeddings {
    dim: usize,
    words: Vec<String>,
    lookup: HashMap<String, GlobalIndex>,
    central: Vec<f32>,
    slices: Vec<SliceSpace>,
}

impl ComposedEmbeddings {
    pub fn new(dim: usize, words: Vec<String>, central: Vec<f32>, slices: Vec<SliceSpace>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be >= 1".into()));
        }
        if central.len() != words.len() * dim {
            return Err(Error::InvalidInput("central table shape mismatch".into()));
        }
        let mut lookup = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if lookup.insert(w.clone(), GlobalIndex(i as u32)).is_some() {
                return Err(Error::InvalidInput(format!("duplicate word {w:?}")));
            }
        }
        for s in &slices {
            if s.members.iter().any(|g| g.get() >= words.len()) {
                return Err(Error::InvalidInput(format!("slice {}: word index out of range", s.id)));
            }
            if s.vectors.len() != s.members.len() * dim {
                return Err(Error::InvalidInput(format!("slice {}: shape mismatch", s.id)));
            }
        }
        Ok(ComposedEmbeddings {
            dim,
            words,
            lookup,
            central,
            slices,
        })
    }

    pub fn from_model(model: &TrainedModel) -> Self {
        let TrainedModel { vocab, tables, .. } = model;
        let dim = tables.dim();
        let central = tables.central(Side::Input).as_slice().to_vec();
        let slices = (0..vocab.num_slices())
            .map(|pos| {
                let members = vocab.members(pos).to_vec();
                let mut vectors = Vec::with_capacity(members.len() * dim);
                for &g in &members {
                    vectors.extend(tables.compose_at(pos, g, Side::Input));
                }
                SliceSpace::new(vocab.slices()[pos].slice().clone(), members, vectors, dim)
                    .expect("model tables are consistent")
            })
            .collect();
        ComposedEmbeddings::new(dim, vocab.words().to_vec(), central, slices)
            .expect("model tables are consistent")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, g: GlobalIndex) -> &str {
        &self.words[g.get()]
    }

    pub fn index_of(&self, word: &str) -> Option<GlobalIndex> {
        self.lookup.get(word).copied()
    }

    pub fn slices(&self) -> &[SliceSpace] {
        &self.slices
    }

    pub fn slice_position(&self, id: &SliceId) -> Result<usize> {
        self.slices
            .iter()
            .position(|s| &s.id == id)
            .ok_or_else(|| Error::UnknownSlice(id.to_string()))
    }

    pub fn slice(&self, pos: usize) -> &SliceSpace {
        &self.slices[pos]
    }

    pub fn central(&self, g: GlobalIndex) -> &[f32] {
        &self.central[g.get() * self.dim..(g.get() + 1) * self.dim]
    }

    /// `v[s, w]` if `w` is in the vocabulary of slice `pos`.
    pub fn vector(&self, pos: usize, g: GlobalIndex) -> Option<&[f32]> {
        let space = &self.slices[pos];
        space
            .rows
            .get(&g)
            .map(|&i| &space.vectors[i * self.dim..(i + 1) * self.dim])
    }

    /// Resolves `(slice, word)` to its position and composed vector.
    pub fn lookup(&self, slice: &SliceId, word: &str) -> Result<(usize, GlobalIndex, &[f32])> {
        let pos = self.slice_position(slice)?;
        let unknown = || Error::UnknownWord {
            slice: slice.to_string(),
            word: word.to_owned(),
        };
        let g = self.index_of(word).ok_or_else(unknown)?;
        let v = self.vector(pos, g).ok_or_else(unknown)?;
        Ok((pos, g, v))
    }

    /// Slice positions whose vocabulary contains `g`.
    pub fn slices_containing(&self, g: GlobalIndex) -> Vec<usize> {
        (0..self.slices.len())
            .filter(|&pos| self.slices[pos].contains(g))
            .collect()
    }
}

pub(crate) fn norm(v: &[f32]) -> f64 {
    v.iter().map(|&x| (x as f64) * (x as f64)).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
}

/// Cosine similarity; 0 when either vector is zero.
pub(crate) fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let denom = norm(a) * norm(b);
    if denom == 0.0 {
        0.0
    } else {
        dot(a, b) / denom
    }
}
