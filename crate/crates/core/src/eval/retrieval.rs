use std::cmp::Ordering;
use std::fs;
use std::path::Path;

use log::debug;
use serde::{Deserialize, Serialize};

use super::space::{cosine, norm, ComposedEmbeddings};
use crate::corpus::{GlobalIndex, SliceId};
use crate::error::{Error, Result};

/// Neighbourhood size used by [`mrr`].
pub const MRR_DEPTH: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Neighbor {
    pub word: String,
    #[serde(skip)]
    pub index: GlobalIndex,
    pub cosine: f64,
}

/// Descending cosine, then ascending global index.
fn ranking_order(a: &(GlobalIndex, f64), b: &(GlobalIndex, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

fn scored(emb: &ComposedEmbeddings, query: &[f32], pos: usize, exclude: Option<GlobalIndex>) -> Vec<(GlobalIndex, f64)> {
    let space = emb.slice(pos);
    let dim = emb.dim();
    space
        .members()
        .iter()
        .enumerate()
        .filter(|&(_, &g)| Some(g) != exclude)
        .map(|(i, &g)| (g, cosine(query, &space.vectors()[i * dim..(i + 1) * dim])))
        .collect()
}

pub(crate) fn neighbors_at(
    emb: &ComposedEmbeddings,
    query: &[f32],
    pos: usize,
    k: usize,
    exclude: Option<GlobalIndex>,
) -> Result<Vec<Neighbor>> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be >= 1".into()));
    }
    if query.len() != emb.dim() {
        return Err(Error::InvalidInput(format!(
            "query has dimension {}, expected {}",
            query.len(),
            emb.dim()
        )));
    }
    if norm(query) == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut all = scored(emb, query, pos, exclude);
    if all.len() > k {
        all.select_nth_unstable_by(k - 1, ranking_order);
        all.truncate(k);
    }
    all.sort_by(ranking_order);
    Ok(all
        .into_iter()
        .map(|(g, c)| Neighbor {
            word: emb.word(g).to_owned(),
            index: g,
            cosine: c,
        })
        .collect())
}

/// The `k` words of `target` whose composed vectors are closest to `query`
/// by cosine, ties broken by ascending global index.
pub fn nearest_neighbors(
    emb: &ComposedEmbeddings,
    query: &[f32],
    target: &SliceId,
    k: usize,
    exclude: Option<&str>,
) -> Result<Vec<Neighbor>> {
    let pos = emb.slice_position(target)?;
    neighbors_at(emb, query, pos, k, exclude.and_then(|w| emb.index_of(w)))
}

/// One line of an alignment test: `(slice, word)` corresponds to
/// `(target_slice, target_word)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentRelation {
    pub slice: SliceId,
    pub word: String,
    pub target_slice: SliceId,
    pub target_word: String,
}

pub fn read_alignment(path: impl AsRef<Path>) -> Result<Vec<AlignmentRelation>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 4 {
            return Err(Error::format(
                "alignment test",
                format!("{}:{}: expected 4 tab-separated fields", path.display(), lineno + 1),
            ));
        }
        out.push(AlignmentRelation {
            slice: SliceId::new(f[0])?,
            word: f[1].to_owned(),
            target_slice: SliceId::new(f[2])?,
            target_word: f[3].to_owned(),
        });
    }
    Ok(out)
}

pub fn write_alignment(relations: &[AlignmentRelation], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text: String = relations
        .iter()
        .map(|r| format!("{}\t{}\t{}\t{}\n", r.slice, r.word, r.target_slice, r.target_word))
        .collect();
    fs::write(path, text).map_err(|e| Error::file(path, e))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrievalOptions {
    /// Drop the source word from the candidate set.
    pub exclude_source: bool,
}

/// 1-based rank of the target among the candidates, or `None` when an
/// endpoint does not resolve.
fn target_rank(emb: &ComposedEmbeddings, rel: &AlignmentRelation, opts: RetrievalOptions) -> Result<Option<usize>> {
    let (src, tgt_pos, tgt) = match resolve(emb, rel) {
        Some(r) => r,
        None => return Ok(None),
    };
    let exclude = opts.exclude_source.then(|| emb.index_of(&rel.word)).flatten();
    if exclude == Some(tgt) {
        return Ok(Some(usize::MAX));
    }
    if norm(src) == 0.0 {
        return Err(Error::ZeroVector);
    }
    let target = (tgt, cosine(src, emb.vector(tgt_pos, tgt).unwrap()));
    let better = scored(emb, src, tgt_pos, exclude)
        .iter()
        .filter(|c| ranking_order(c, &target) == Ordering::Less)
        .count();
    Ok(Some(better + 1))
}

fn resolve<'a>(emb: &'a ComposedEmbeddings, rel: &AlignmentRelation) -> Option<(&'a [f32], usize, GlobalIndex)> {
    let (_, _, src) = emb.lookup(&rel.slice, &rel.word).ok()?;
    let (pos, g, _) = emb.lookup(&rel.target_slice, &rel.target_word).ok()?;
    Some((src, pos, g))
}

/// An alignment metric under both conventions for unresolvable relations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlignmentScore {
    /// Mean over resolvable relations.
    pub value: f64,
    /// Mean over all relations, unresolvable ones counted as misses.
    pub value_with_misses: f64,
    pub evaluated: usize,
    pub total: usize,
    pub excluded: Vec<AlignmentRelation>,
}

fn score_relations(
    relations: &[AlignmentRelation],
    emb: &ComposedEmbeddings,
    opts: RetrievalOptions,
    credit: impl Fn(usize) -> f64,
) -> Result<AlignmentScore> {
    if relations.is_empty() {
        return Err(Error::EmptyTest);
    }
    let mut sum = 0.0;
    let mut excluded = Vec::new();
    for rel in relations {
        match target_rank(emb, rel, opts)? {
            Some(rank) => sum += credit(rank),
            None => {
                debug!(
                    "excluding unresolvable relation {}:{} -> {}:{}",
                    rel.slice, rel.word, rel.target_slice, rel.target_word
                );
                excluded.push(rel.clone());
            }
        }
    }
    let evaluated = relations.len() - excluded.len();
    Ok(AlignmentScore {
        value: if evaluated == 0 { 0.0 } else { sum / evaluated as f64 },
        value_with_misses: sum / relations.len() as f64,
        evaluated,
        total: relations.len(),
        excluded,
    })
}

/// Fraction of relations whose target lies among the `k` nearest
/// neighbours of the source vector in the target slice.
pub fn mp_at_k(
    relations: &[AlignmentRelation],
    emb: &ComposedEmbeddings,
    k: usize,
    opts: RetrievalOptions,
) -> Result<AlignmentScore> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be >= 1".into()));
    }
    score_relations(relations, emb, opts, |rank| if rank <= k { 1.0 } else { 0.0 })
}

/// Mean reciprocal rank of the target within the top [`MRR_DEPTH`]
/// neighbours; a target further down contributes 0.
pub fn mrr(relations: &[AlignmentRelation], emb: &ComposedEmbeddings, opts: RetrievalOptions) -> Result<AlignmentScore> {
    score_relations(relations, emb, opts, |rank| {
        if rank <= MRR_DEPTH {
            1.0 / rank as f64
        } else {
            0.0
        }
    })
}

/// Fraction of relations mapping a word to itself.
pub fn identity_baseline(relations: &[AlignmentRelation]) -> Result<f64> {
    if relations.is_empty() {
        return Err(Error::EmptyTest);
    }
    let same = relations.iter().filter(|r| r.word == r.target_word).count();
    Ok(same as f64 / relations.len() as f64)
}
