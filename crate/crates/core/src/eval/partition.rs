use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use serde::Serialize;

use crate::error::{Error, Result};

/// Label of every item under two partitions, remapped to dense ids.
struct Contingency {
    n: u64,
    rows: Vec<u64>,
    cols: Vec<u64>,
    cells: BTreeMap<(usize, usize), u64>,
}

fn dense<L: Eq + Hash + Clone>(labels: &[L]) -> (Vec<usize>, usize) {
    let mut ids = HashMap::new();
    let mapped = labels
        .iter()
        .map(|l| {
            let next = ids.len();
            *ids.entry(l.clone()).or_insert(next)
        })
        .collect();
    (mapped, ids.len())
}

impl Contingency {
    fn new<A: Eq + Hash + Clone, B: Eq + Hash + Clone>(a: &[A], b: &[B]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::ItemSetMismatch);
        }
        let (a, na) = dense(a);
        let (b, nb) = dense(b);
        let mut rows = vec![0; na];
        let mut cols = vec![0; nb];
        let mut cells = BTreeMap::new();
        for (&i, &j) in a.iter().zip(&b) {
            rows[i] += 1;
            cols[j] += 1;
            *cells.entry((i, j)).or_insert(0) += 1;
        }
        Ok(Contingency {
            n: a.len() as u64,
            rows,
            cols,
            cells,
        })
    }

    /// Each row and each column holds exactly one nonzero cell.
    fn is_bijection(&self) -> bool {
        self.cells.len() == self.rows.len() && self.cells.len() == self.cols.len()
    }
}

/// Sum in a canonical order, so the result does not depend on how the
/// terms were enumerated.
fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.into_iter().sum()
}

fn entropy(marginals: &[u64], n: f64) -> f64 {
    sorted_sum(
        marginals
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            })
            .collect(),
    )
}

/// Normalized mutual information `2 I(A, B) / (H(A) + H(B))` (natural
/// logarithms) between two labelings of the same items, given position by
/// position. Identical partitions up to relabeling score 1; when both
/// entropies vanish the score is 0.
pub fn nmi<A, B>(a: &[A], b: &[B]) -> Result<f64>
where
    A: Eq + Hash + Clone,
    B: Eq + Hash + Clone,
{
    let table = Contingency::new(a, b)?;
    if table.n == 0 {
        return Ok(0.0);
    }
    let n = table.n as f64;
    let ha = entropy(&table.rows, n);
    let hb = entropy(&table.cols, n);
    if ha + hb == 0.0 {
        return Ok(0.0);
    }
    if table.is_bijection() {
        return Ok(1.0);
    }
    let mi = sorted_sum(
        table
            .cells
            .iter()
            .map(|(&(i, j), &c)| {
                let c = c as f64;
                (c / n) * ((n * c) / (table.rows[i] as f64 * table.cols[j] as f64)).ln()
            })
            .collect(),
    );
    Ok((2.0 * mi / (ha + hb)).clamp(0.0, 1.0))
}

/// [`nmi`] over partitions keyed by item.
pub fn nmi_keyed<K: Ord, A, B>(a: &BTreeMap<K, A>, b: &BTreeMap<K, B>) -> Result<f64>
where
    A: Eq + Hash + Clone,
    B: Eq + Hash + Clone,
{
    let (la, lb) = align(a, b)?;
    nmi(&la, &lb)
}

fn align<K: Ord, A: Clone, B: Clone>(a: &BTreeMap<K, A>, b: &BTreeMap<K, B>) -> Result<(Vec<A>, Vec<B>)> {
    if a.len() != b.len() || a.keys().zip(b.keys()).any(|(x, y)| x != y) {
        return Err(Error::ItemSetMismatch);
    }
    Ok((a.values().cloned().collect(), b.values().cloned().collect()))
}

/// Pair-counting precision/recall summary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FBetaScore {
    pub beta: f64,
    pub value: f64,
    pub precision: f64,
    pub recall: f64,
    /// Pairs sharing both cluster and section.
    pub true_positives: u64,
    /// Pairs sharing a cluster but not a section.
    pub false_positives: u64,
    /// Pairs sharing a section but not a cluster.
    pub false_negatives: u64,
}

fn pairs(c: u64) -> u64 {
    c * c.saturating_sub(1) / 2
}

/// F-beta over unordered item pairs, with `sections` as the reference and
/// `clusters` as the prediction. Zero when no pair is a true positive.
pub fn f_beta<A, B>(sections: &[A], clusters: &[B], beta: f64) -> Result<FBetaScore>
where
    A: Eq + Hash + Clone,
    B: Eq + Hash + Clone,
{
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidInput("beta must be > 0".into()));
    }
    let table = Contingency::new(sections, clusters)?;
    let tp: u64 = table.cells.values().map(|&c| pairs(c)).sum();
    let same_section: u64 = table.rows.iter().map(|&c| pairs(c)).sum();
    let same_cluster: u64 = table.cols.iter().map(|&c| pairs(c)).sum();
    let fp = same_cluster - tp;
    let fn_ = same_section - tp;
    let (precision, recall, value) = if tp == 0 {
        (0.0, 0.0, 0.0)
    } else {
        let p = tp as f64 / (tp + fp) as f64;
        let r = tp as f64 / (tp + fn_) as f64;
        let b2 = beta * beta;
        (p, r, (b2 + 1.0) * p * r / (b2 * p + r))
    };
    Ok(FBetaScore {
        beta,
        value,
        precision,
        recall,
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
    })
}

/// [`f_beta`] over partitions keyed by item.
pub fn f_beta_keyed<K: Ord, A, B>(
    sections: &BTreeMap<K, A>,
    clusters: &BTreeMap<K, B>,
    beta: f64,
) -> Result<FBetaScore>
where
    A: Eq + Hash + Clone,
    B: Eq + Hash + Clone,
{
    let (la, lb) = align(sections, clusters)?;
    f_beta(&la, &lb, beta)
}
