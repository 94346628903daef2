//! The regularized skip-gram negative-sampling objective and its exact
//! gradient.
//!
//! For a batch of slice `s` with `n` positive pairs the objective is
//!
//! ```text
//! pos = (1/n) * sum over positives  log sigmoid( u_o . v_i )
//! neg = (1/n) * sum over negatives  log sigmoid(-u_o . v_i )
//! reg = -sum over w in V_s  lambda(s, w) * |delta_in[s, w]|^2
//! ```
//!
//! with `v_i = central_in[i] + delta_in[s, i]` and
//! `u_o = central_out[o] + delta_out[s, o]`. Both data terms share the
//! positive-pair count as denominator. Several batches (of different
//! slices) add up; the penalty counts each slice present once. Training
//! maximizes the total.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::tables::dot;
use super::{Block, EmbeddingTables, Scalar, Side};
use crate::corpus::GlobalIndex;
use crate::error::{Error, Result};

/// Pairs of one slice in global indices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Batch {
    /// Slice position in the tables.
    pub slice: usize,
    /// `(input, output)` pairs labelled positive.
    pub positives: Vec<(GlobalIndex, GlobalIndex)>,
    /// `(input, output)` pairs labelled negative.
    pub negatives: Vec<(GlobalIndex, GlobalIndex)>,
}

impl Batch {
    fn normalizer(&self) -> f64 {
        match (self.positives.len(), self.negatives.len()) {
            (0, 0) => 1.0,
            (0, n) | (n, _) => n as f64,
        }
    }
}

/// Drift penalty weights.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Regularization {
    pub lambda: f64,
    /// Per-(slice position, word) weights replacing `lambda`.
    pub overrides: HashMap<(usize, GlobalIndex), f64>,
    /// Penalize the output drift as well.
    pub include_output: bool,
}

impl Regularization {
    pub fn constant(lambda: f64) -> Self {
        Regularization {
            lambda,
            ..Default::default()
        }
    }

    pub fn lambda_for(&self, slice: usize, word: GlobalIndex) -> f64 {
        self.overrides
            .get(&(slice, word))
            .copied()
            .unwrap_or(self.lambda)
    }

    fn is_zero(&self) -> bool {
        self.lambda == 0.0 && self.overrides.values().all(|&l| l == 0.0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub pos: f64,
    pub neg: f64,
    pub reg: f64,
    pub total: f64,
}

impl LossBreakdown {
    fn new(pos: f64, neg: f64, reg: f64) -> Self {
        LossBreakdown {
            pos,
            neg,
            reg,
            total: pos + neg + reg,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.pos.is_finite() && self.neg.is_finite() && self.reg.is_finite() && self.total.is_finite()
    }
}

/// Rows of one parameter block that received a gradient.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseRows {
    slots: HashMap<u32, usize>,
    rows: Vec<u32>,
    data: Vec<f64>,
}

impl SparseRows {
    fn row_mut(&mut self, row: u32, dim: usize) -> &mut [f64] {
        let slot = *self.slots.entry(row).or_insert_with(|| {
            self.rows.push(row);
            self.data.resize(self.data.len() + dim, 0.0);
            self.rows.len() - 1
        });
        &mut self.data[slot * dim..(slot + 1) * dim]
    }

    fn get(&self, row: u32, dim: usize) -> Option<&[f64]> {
        self.slots
            .get(&row)
            .map(|&slot| &self.data[slot * dim..(slot + 1) * dim])
    }
}

/// Gradient of the objective with respect to every touched row of every
/// block.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    dim: usize,
    blocks: Vec<SparseRows>,
}

impl Gradients {
    pub fn new(dim: usize, num_blocks: usize) -> Self {
        Gradients {
            dim,
            blocks: vec![SparseRows::default(); num_blocks],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Gradient row, `None` if the row was not touched (zero gradient).
    pub fn row(&self, block: Block, row: usize) -> Option<&[f64]> {
        self.blocks[block.ordinal()].get(row as u32, self.dim)
    }

    /// Touched rows of a block, in first-touch order.
    pub fn touched_rows(&self, block: Block) -> &[u32] {
        &self.blocks[block.ordinal()].rows
    }

    pub(crate) fn row_mut(&mut self, block: Block, row: usize) -> &mut [f64] {
        let dim = self.dim;
        self.blocks[block.ordinal()].row_mut(row as u32, dim)
    }

    /// Adds `other` into `self`.
    pub fn merge(&mut self, other: &Gradients) {
        for b in 0..self.blocks.len() {
            let block = Block::from_ordinal(b);
            for (slot, &row) in other.blocks[b].rows.iter().enumerate() {
                let src = &other.blocks[b].data[slot * self.dim..(slot + 1) * self.dim];
                for (d, s) in self.row_mut(block, row as usize).iter_mut().zip(src) {
                    *d += s;
                }
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.blocks.iter().all(|b| b.data.iter().all(|v| v.is_finite()))
    }
}

/// `log(sigmoid(x))` without overflow.
pub(crate) fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn axpy(out: &mut [f64], a: f64, x: &[f64]) {
    for (o, v) in out.iter_mut().zip(x) {
        *o += a * v;
    }
}

/// Evaluates the objective and, if `with_gradient`, its gradient.
pub fn evaluate<F: Scalar>(
    tables: &EmbeddingTables<F>,
    batches: &[Batch],
    reg: &Regularization,
    with_gradient: bool,
) -> Result<(LossBreakdown, Option<Gradients>)> {
    let dim = tables.dim();
    let mut grads = with_gradient.then(|| Gradients::new(dim, tables.num_blocks()));
    let mut v = vec![0.0; dim];
    let mut u = vec![0.0; dim];
    let (mut pos_total, mut neg_total) = (0.0, 0.0);

    for batch in batches {
        let s = batch.slice;
        if s >= tables.num_slices() {
            return Err(Error::InvalidInput(format!("batch slice {s} out of range")));
        }
        let scale = 1.0 / batch.normalizer();
        for (pairs, positive) in [(&batch.positives, true), (&batch.negatives, false)] {
            let mut term = 0.0;
            for &(input, output) in pairs {
                if !(tables.is_member(s, input) && tables.is_member(s, output)) {
                    return Err(Error::InvalidInput(format!(
                        "pair ({}, {}) is outside the vocabulary of slice {}",
                        input.0,
                        output.0,
                        tables.slices()[s]
                    )));
                }
                tables.compose_f64(s, input, Side::Input, &mut v);
                tables.compose_f64(s, output, Side::Output, &mut u);
                let x = dot(&u, &v);
                // d/dx log sigmoid(x) = sigmoid(-x); d/dx log sigmoid(-x) = -sigmoid(x).
                let coef = if positive {
                    term += log_sigmoid(x);
                    sigmoid(-x) * scale
                } else {
                    term += log_sigmoid(-x);
                    -sigmoid(x) * scale
                };
                if let Some(g) = grads.as_mut() {
                    for block in [Block::CentralIn, Block::DriftIn(s)] {
                        axpy(g.row_mut(block, input.get()), coef, &u);
                    }
                    for block in [Block::CentralOut, Block::DriftOut(s)] {
                        axpy(g.row_mut(block, output.get()), coef, &v);
                    }
                }
            }
            if positive {
                pos_total += term * scale;
            } else {
                neg_total += term * scale;
            }
        }
    }

    let mut reg_total = 0.0;
    if !reg.is_zero() {
        let slices: BTreeSet<usize> = batches.iter().map(|b| b.slice).collect();
        for s in slices {
            let mut sides = vec![(Side::Input, Block::DriftIn(s))];
            if reg.include_output {
                sides.push((Side::Output, Block::DriftOut(s)));
            }
            for (side, block) in sides {
                let drift = tables.drift(s, side);
                for w in 0..tables.vocab_len() {
                    let word = GlobalIndex(w as u32);
                    let lambda = reg.lambda_for(s, word);
                    if lambda == 0.0 || !tables.is_member(s, word) {
                        continue;
                    }
                    let row = drift.row(w);
                    reg_total -= lambda * row.iter().map(|d| d.to_f64() * d.to_f64()).sum::<f64>();
                    if let Some(g) = grads.as_mut() {
                        for (gv, d) in g.row_mut(block, w).iter_mut().zip(row) {
                            *gv -= 2.0 * lambda * d.to_f64();
                        }
                    }
                }
            }
        }
    }

    let breakdown = LossBreakdown::new(pos_total, neg_total, reg_total);
    if !breakdown.is_finite() || grads.as_ref().is_some_and(|g| !g.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok((breakdown, grads))
}

/// Objective value of `batches`.
pub fn loss<F: Scalar>(
    tables: &EmbeddingTables<F>,
    batches: &[Batch],
    reg: &Regularization,
) -> Result<LossBreakdown> {
    evaluate(tables, batches, reg, false).map(|(l, _)| l)
}

/// Gradient of the objective of `batches`.
pub fn gradients<F: Scalar>(
    tables: &EmbeddingTables<F>,
    batches: &[Batch],
    reg: &Regularization,
) -> Result<Gradients> {
    evaluate(tables, batches, reg, true).map(|(_, g)| g.expect("gradient requested"))
}
