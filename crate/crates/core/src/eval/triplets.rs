use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use super::kmeans::{spherical_kmeans, ClusterAssignment};
use super::partition::{f_beta, nmi, FBetaScore};
use super::space::ComposedEmbeddings;
use crate::corpus::{GlobalIndex, SliceId};
use crate::error::{Error, Result};

/// Occurrences of `word` in `slice` within documents of `section`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectionCount {
    pub slice: SliceId,
    pub word: String,
    pub section: String,
    pub count: u64,
}

/// Which counts rank the "most popular" words.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PopularityScope {
    /// Total count of the word in the slice.
    #[default]
    Slice,
    /// Count of the word within the section being examined.
    SliceSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripletOptions {
    pub top_n: usize,
    /// A word joins a section when strictly more than this fraction of its
    /// slice occurrences fall in it.
    pub threshold: f64,
    pub scope: PopularityScope,
    /// Accepted section labels; `None` accepts every label present.
    pub sections: Option<Vec<String>>,
}

impl Default for TripletOptions {
    fn default() -> Self {
        TripletOptions {
            top_n: 200,
            threshold: 0.35,
            scope: PopularityScope::Slice,
            sections: None,
        }
    }
}

/// A `(slice, word, section)` item of the reference partition.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triplet {
    pub slice: SliceId,
    pub word: String,
    pub section: String,
}

/// Total count of a word and its count per section.
type WordCounts<'a> = (u64, BTreeMap<&'a str, u64>);

pub fn build_triplets(annotations: &[SectionCount], opts: &TripletOptions) -> Result<Vec<Triplet>> {
    if let Some(allowed) = &opts.sections {
        let allowed: BTreeSet<&str> = allowed.iter().map(String::as_str).collect();
        if let Some(a) = annotations.iter().find(|a| !allowed.contains(a.section.as_str())) {
            return Err(Error::UnknownSection(a.section.clone()));
        }
    }
    let mut by_slice: BTreeMap<&SliceId, BTreeMap<&str, WordCounts>> = BTreeMap::new();
    for a in annotations {
        let entry = by_slice.entry(&a.slice).or_default().entry(&a.word).or_default();
        entry.0 += a.count;
        *entry.1.entry(&a.section).or_default() += a.count;
    }
    let sections: BTreeSet<&str> = annotations.iter().map(|a| a.section.as_str()).collect();

    let mut out = Vec::new();
    for (slice, words) in &by_slice {
        let popular = |key: &dyn Fn(&WordCounts) -> u64| {
            let mut ranked: Vec<(&str, u64)> = words.iter().map(|(w, e)| (*w, key(e))).filter(|&(_, c)| c > 0).collect();
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
            ranked.truncate(opts.top_n);
            ranked.into_iter().map(|(w, _)| w).collect::<Vec<_>>()
        };
        let slice_top = popular(&|e| e.0);
        for &section in &sections {
            let candidates = match opts.scope {
                PopularityScope::Slice => slice_top.clone(),
                PopularityScope::SliceSection => popular(&|e| e.1.get(section).copied().unwrap_or(0)),
            };
            for word in candidates {
                let (total, per_section) = &words[word];
                let in_section = per_section.get(section).copied().unwrap_or(0);
                if *total > 0 && in_section as f64 / *total as f64 > opts.threshold {
                    out.push(Triplet {
                        slice: (*slice).clone(),
                        word: word.to_owned(),
                        section: section.to_owned(),
                    });
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

fn read_tsv(path: &Path, fields: usize, what: &'static str) -> Result<Vec<Vec<String>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<String> = line.split('\t').map(str::to_owned).collect();
        if f.len() != fields {
            return Err(Error::format(
                what,
                format!("{}:{}: expected {fields} tab-separated fields", path.display(), lineno + 1),
            ));
        }
        rows.push(f);
    }
    Ok(rows)
}

/// Reads `slice<TAB>word<TAB>section<TAB>count` lines.
pub fn read_annotations(path: impl AsRef<Path>) -> Result<Vec<SectionCount>> {
    let path = path.as_ref();
    read_tsv(path, 4, "section annotations")?
        .into_iter()
        .map(|f| {
            Ok(SectionCount {
                slice: SliceId::new(f[0].as_str())?,
                word: f[1].clone(),
                section: f[2].clone(),
                count: f[3]
                    .parse()
                    .map_err(|_| Error::format("section annotations", format!("bad count {:?}", f[3])))?,
            })
        })
        .collect()
}

/// Reads `slice<TAB>word<TAB>section` lines.
pub fn read_triplets(path: impl AsRef<Path>) -> Result<Vec<Triplet>> {
    let path = path.as_ref();
    read_tsv(path, 3, "triplets")?
        .into_iter()
        .map(|f| {
            Ok(Triplet {
                slice: SliceId::new(f[0].as_str())?,
                word: f[1].clone(),
                section: f[2].clone(),
            })
        })
        .collect()
}

pub fn write_triplets(triplets: &[Triplet], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text: String = triplets
        .iter()
        .map(|t| format!("{}\t{}\t{}\n", t.slice, t.word, t.section))
        .collect();
    fs::write(path, text).map_err(|e| Error::file(path, e))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusteringOptions {
    /// Number of clusters; defaults to the number of distinct sections.
    pub k: Option<usize>,
    pub seed: u64,
    pub max_iters: usize,
    pub beta: f64,
    /// Cluster every `(slice, word)` of the model rather than only the
    /// triplet items. Metrics are still computed over triplet items.
    pub all_items: bool,
}

impl Default for ClusteringOptions {
    fn default() -> Self {
        ClusteringOptions {
            k: None,
            seed: 1,
            max_iters: 100,
            beta: 5.0,
            all_items: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusteringOutcome {
    pub k: usize,
    pub nmi: f64,
    pub f_beta: FBetaScore,
    pub evaluated: usize,
    pub excluded: Vec<Triplet>,
    /// Cluster of each evaluated triplet, in input order.
    pub clusters: Vec<usize>,
    pub converged: bool,
    pub iterations: usize,
}

/// Clusters composed vectors with spherical k-means and scores the result
/// against the sections of `triplets`. Triplets whose word is not in the
/// slice vocabulary are excluded with a warning.
pub fn evaluate_clustering(
    emb: &ComposedEmbeddings,
    triplets: &[Triplet],
    opts: &ClusteringOptions,
) -> Result<ClusteringOutcome> {
    let mut items: Vec<(usize, GlobalIndex)> = Vec::new();
    let mut labels: Vec<&str> = Vec::new();
    let mut excluded = Vec::new();
    for t in triplets {
        match emb.lookup(&t.slice, &t.word) {
            Ok((pos, g, _)) => {
                items.push((pos, g));
                labels.push(&t.section);
            }
            Err(Error::UnknownSlice(_)) | Err(Error::UnknownWord { .. }) => {
                warn!("excluding triplet {}:{} ({}): not in model", t.slice, t.word, t.section);
                excluded.push(t.clone());
            }
            Err(e) => return Err(e),
        }
    }
    if items.is_empty() {
        return Err(Error::EmptyTest);
    }
    let k = match opts.k {
        Some(k) => k,
        None => labels.iter().collect::<BTreeSet<_>>().len(),
    };

    let to_f64 = |v: &[f32]| v.iter().map(|&x| x as f64).collect::<Vec<f64>>();
    let (points, item_rows): (Vec<Vec<f64>>, Vec<usize>) = if opts.all_items {
        let mut row_of = HashMap::new();
        let mut points = Vec::new();
        for (pos, space) in emb.slices().iter().enumerate() {
            for &g in space.members() {
                row_of.insert((pos, g), points.len());
                points.push(to_f64(emb.vector(pos, g).unwrap()));
            }
        }
        let rows = items.iter().map(|key| row_of[key]).collect();
        (points, rows)
    } else {
        let points = items.iter().map(|&(pos, g)| to_f64(emb.vector(pos, g).unwrap())).collect();
        (points, (0..items.len()).collect())
    };
    let ClusterAssignment {
        assignment,
        converged,
        iterations,
        ..
    } = spherical_kmeans(&points, k, opts.seed, opts.max_iters)?;
    let clusters: Vec<usize> = item_rows.iter().map(|&r| assignment[r]).collect();
    Ok(ClusteringOutcome {
        k,
        nmi: nmi(&labels, &clusters)?,
        f_beta: f_beta(&labels, &clusters, opts.beta)?,
        evaluated: items.len(),
        excluded,
        clusters,
        converged,
        iterations,
    })
}
