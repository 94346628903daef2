use std::collections::BTreeMap;

use log::warn;
use serde::Serialize;

use super::retrieval::{neighbors_at, Neighbor};
use super::space::{norm, ComposedEmbeddings};
use crate::corpus::{GlobalIndex, SliceId};
use crate::error::{Error, Result};

/// Cosine threshold reported by [`cosine_similarity_report`].
pub const STABLE_COSINE: f64 = 0.95;

/// Sum of the unit-normalized composed vectors of `word` over the slices
/// whose vocabulary contains it. Zero vectors are skipped.
pub fn average_representation(emb: &ComposedEmbeddings, word: GlobalIndex) -> Result<Vec<f64>> {
    let slices = emb.slices_containing(word);
    if slices.is_empty() {
        return Err(Error::InvalidInput(format!("word {:?} is in no slice", emb.word(word))));
    }
    let mut sum = vec![0.0; emb.dim()];
    for pos in slices {
        let v = emb.vector(pos, word).unwrap();
        let n = norm(v);
        if n == 0.0 {
            warn!("zero vector for {:?} in slice {}", emb.word(word), emb.slice(pos).id());
            continue;
        }
        for (s, &x) in sum.iter_mut().zip(v) {
            *s += x as f64 / n;
        }
    }
    Ok(sum)
}

fn cosine64(a: &[f32], b: &[f64]) -> f64 {
    let na = norm(a);
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    a.iter().zip(b).map(|(&x, y)| x as f64 * y).sum::<f64>() / (na * nb)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityEntry {
    pub slice: SliceId,
    pub word: String,
    pub cosine: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub min_slices: usize,
    /// Words present in at least `min_slices` slices.
    pub words: usize,
    pub entries: Vec<StabilityEntry>,
    /// Fraction of entries with cosine above [`STABLE_COSINE`].
    pub fraction_stable: f64,
}

impl StabilityReport {
    /// Sorted cosines with their empirical cumulative fraction.
    pub fn cdf(&self) -> Vec<(f64, f64)> {
        let mut c: Vec<f64> = self.entries.iter().map(|e| e.cosine).collect();
        c.sort_by(f64::total_cmp);
        let n = c.len() as f64;
        c.into_iter().enumerate().map(|(i, x)| (x, (i + 1) as f64 / n)).collect()
    }
}

/// Cosine between every `v[s, w]` and the average representation of `w`,
/// for words present in at least `min_slices` slices.
pub fn cosine_similarity_report(emb: &ComposedEmbeddings, min_slices: usize) -> Result<StabilityReport> {
    let mut entries = Vec::new();
    let mut words = 0;
    for g in (0..emb.words().len()).map(|g| GlobalIndex(g as u32)) {
        let slices = emb.slices_containing(g);
        if slices.len() < min_slices.max(1) {
            continue;
        }
        words += 1;
        let avg = average_representation(emb, g)?;
        for pos in slices {
            entries.push(StabilityEntry {
                slice: emb.slice(pos).id().clone(),
                word: emb.word(g).to_owned(),
                cosine: cosine64(emb.vector(pos, g).unwrap(), &avg),
            });
        }
    }
    let stable = entries.iter().filter(|e| e.cosine > STABLE_COSINE).count();
    Ok(StabilityReport {
        min_slices,
        words,
        fraction_stable: if entries.is_empty() {
            0.0
        } else {
            stable as f64 / entries.len() as f64
        },
        entries,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SliceHistogram {
    pub slice: SliceId,
    pub shared: usize,
    pub mean: f64,
    pub counts: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceHistograms {
    pub base: SliceId,
    /// `bins + 1` edges shared by every histogram.
    pub edges: Vec<f64>,
    pub slices: Vec<SliceHistogram>,
}

/// Histograms of `‖v[base, w] - v[s, w]‖` over the words shared by the base
/// slice and each other slice, on common bin edges spanning `[0, max]`.
pub fn distance_histogram(
    emb: &ComposedEmbeddings,
    base: &SliceId,
    others: &[SliceId],
    bins: usize,
) -> Result<DistanceHistograms> {
    if bins == 0 {
        return Err(Error::InvalidInput("bins must be >= 1".into()));
    }
    let base_pos = emb.slice_position(base)?;
    let mut distances = Vec::with_capacity(others.len());
    for other in others {
        let pos = emb.slice_position(other)?;
        let d: Vec<f64> = emb
            .slice(base_pos)
            .members()
            .iter()
            .filter_map(|&g| {
                let b = emb.vector(base_pos, g).unwrap();
                emb.vector(pos, g).map(|v| {
                    b.iter()
                        .zip(v)
                        .map(|(&x, &y)| {
                            let d = x as f64 - y as f64;
                            d * d
                        })
                        .sum::<f64>()
                        .sqrt()
                })
            })
            .collect();
        if d.is_empty() {
            return Err(Error::EmptySharedVocab(base.to_string(), other.to_string()));
        }
        distances.push(d);
    }
    let max = distances.iter().flatten().copied().fold(0.0, f64::max);
    let width = if max > 0.0 { max / bins as f64 } else { 1.0 / bins as f64 };
    let edges: Vec<f64> = (0..=bins).map(|i| i as f64 * width).collect();
    let slices = others
        .iter()
        .zip(distances)
        .map(|(id, d)| {
            let mut counts = vec![0u64; bins];
            for &x in &d {
                counts[((x / width) as usize).min(bins - 1)] += 1;
            }
            SliceHistogram {
                slice: id.clone(),
                shared: d.len(),
                mean: d.iter().sum::<f64>() / d.len() as f64,
                counts,
            }
        })
        .collect();
    Ok(DistanceHistograms {
        base: base.clone(),
        edges,
        slices,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SliceNeighbors {
    pub slice: SliceId,
    pub neighbors: Vec<Neighbor>,
}

/// Rank of a word in each slice's list, `None` when it is absent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub word: String,
    pub ranks: Vec<Option<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NeighborTrack {
    pub anchor_slice: SliceId,
    pub anchor_word: String,
    pub k: usize,
    pub slices: Vec<SliceNeighbors>,
    pub trajectories: Vec<Trajectory>,
}

/// Top-`k` neighbours of the fixed vector `v[anchor_slice, anchor_word]`
/// in every slice, with the rank trajectory of each word that appears.
pub fn track_neighbors(emb: &ComposedEmbeddings, anchor_slice: &SliceId, anchor_word: &str, k: usize) -> Result<NeighborTrack> {
    let (_, _, anchor) = emb.lookup(anchor_slice, anchor_word)?;
    let slices = (0..emb.slices().len())
        .map(|pos| {
            Ok(SliceNeighbors {
                slice: emb.slice(pos).id().clone(),
                neighbors: neighbors_at(emb, anchor, pos, k, None)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    // Words in order of first appearance.
    let mut order: BTreeMap<(usize, usize), &str> = BTreeMap::new();
    let mut seen = std::collections::HashSet::new();
    for (p, s) in slices.iter().enumerate() {
        for (r, n) in s.neighbors.iter().enumerate() {
            if seen.insert(n.word.as_str()) {
                order.insert((p, r), &n.word);
            }
        }
    }
    let trajectories = order
        .values()
        .map(|&w| Trajectory {
            word: w.to_owned(),
            ranks: slices
                .iter()
                .map(|s| s.neighbors.iter().position(|n| n.word == w).map(|i| i + 1))
                .collect(),
        })
        .collect();
    Ok(NeighborTrack {
        anchor_slice: anchor_slice.clone(),
        anchor_word: anchor_word.to_owned(),
        k,
        slices,
        trajectories,
    })
}
