use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{OptimizerState, TrainingConfig};
use crate::corpus::{GlobalIndex, SliceId, VocabularyIndex};
use crate::error::{Error, Result};

/// Floating-point element type of the embedding tables. Arithmetic is done
/// in `f64`; training stores `f32`, gradient checks use `f64` tables.
pub trait Scalar: Copy + Default + PartialEq + fmt::Debug + Send + Sync + 'static {
    fn to_f64(self) -> f64;
    fn from_f64(v: f64) -> Self;
}

impl Scalar for f32 {
    fn to_f64(self) -> f64 {
        self as f64
    }

    fn from_f64(v: f64) -> Self {
        v as f32
    }
}

impl Scalar for f64 {
    fn to_f64(self) -> f64 {
        self
    }

    fn from_f64(v: f64) -> Self {
        v
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Scalar> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![F::default(); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "matrix data has {} elements, expected {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [F] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[F] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [F] {
        &mut self.data
    }

    fn map<G: Scalar>(&self) -> Matrix<G> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| G::from_f64(v.to_f64())).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Target-word ("input") vectors.
    Input,
    /// Context-word ("output") vectors.
    Output,
}

/// One parameter matrix of [`EmbeddingTables`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Block {
    CentralIn,
    CentralOut,
    DriftIn(usize),
    DriftOut(usize),
}

impl Block {
    /// Position in the fixed block order: central in, central out, then
    /// drift in and drift out of every slice.
    pub fn ordinal(self) -> usize {
        match self {
            Block::CentralIn => 0,
            Block::CentralOut => 1,
            Block::DriftIn(s) => 2 + 2 * s,
            Block::DriftOut(s) => 3 + 2 * s,
        }
    }

    pub fn from_ordinal(i: usize) -> Block {
        match i {
            0 => Block::CentralIn,
            1 => Block::CentralOut,
            _ if i.is_multiple_of(2) => Block::DriftIn((i - 2) / 2),
            _ => Block::DriftOut((i - 3) / 2),
        }
    }
}

/// Central input/output tables shared by all slices plus one pair of drift
/// tables per slice.
///
/// Drift rows of words outside a slice's vocabulary are zero and stay zero:
/// only pairs drawn from a slice touch its drift rows.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTables<F = f32> {
    dim: usize,
    slices: Vec<SliceId>,
    members: Vec<Vec<bool>>,
    central_in: Matrix<F>,
    central_out: Matrix<F>,
    drift_in: Vec<Matrix<F>>,
    drift_out: Vec<Matrix<F>>,
}

impl<F: Scalar> EmbeddingTables<F> {
    /// All-zero tables shaped after `vocab`.
    pub fn zeros(vocab: &VocabularyIndex, dim: usize) -> Self {
        let n = vocab.len();
        let slices: Vec<SliceId> = vocab.slice_ids().cloned().collect();
        EmbeddingTables {
            dim,
            members: (0..slices.len()).map(|s| vocab.membership_mask(s)).collect(),
            central_in: Matrix::zeros(n, dim),
            central_out: Matrix::zeros(n, dim),
            drift_in: (0..slices.len()).map(|_| Matrix::zeros(n, dim)).collect(),
            drift_out: (0..slices.len()).map(|_| Matrix::zeros(n, dim)).collect(),
            slices,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab_len(&self) -> usize {
        self.central_in.rows()
    }

    pub fn num_slices(&self) -> usize {
        self.slices.len()
    }

    pub fn slices(&self) -> &[SliceId] {
        &self.slices
    }

    pub fn slice_position(&self, slice: &SliceId) -> Result<usize> {
        self.slices
            .iter()
            .position(|s| s == slice)
            .ok_or_else(|| Error::UnknownSlice(slice.to_string()))
    }

    /// Whether `word` belongs to the vocabulary of slice `pos`.
    pub fn is_member(&self, pos: usize, word: GlobalIndex) -> bool {
        self.members[pos][word.get()]
    }

    pub fn num_blocks(&self) -> usize {
        2 + 2 * self.slices.len()
    }

    pub fn block(&self, block: Block) -> &Matrix<F> {
        match block {
            Block::CentralIn => &self.central_in,
            Block::CentralOut => &self.central_out,
            Block::DriftIn(s) => &self.drift_in[s],
            Block::DriftOut(s) => &self.drift_out[s],
        }
    }

    pub fn block_mut(&mut self, block: Block) -> &mut Matrix<F> {
        match block {
            Block::CentralIn => &mut self.central_in,
            Block::CentralOut => &mut self.central_out,
            Block::DriftIn(s) => &mut self.drift_in[s],
            Block::DriftOut(s) => &mut self.drift_out[s],
        }
    }

    pub fn central(&self, side: Side) -> &Matrix<F> {
        match side {
            Side::Input => &self.central_in,
            Side::Output => &self.central_out,
        }
    }

    pub fn drift(&self, pos: usize, side: Side) -> &Matrix<F> {
        match side {
            Side::Input => &self.drift_in[pos],
            Side::Output => &self.drift_out[pos],
        }
    }

    /// `central[word] + drift[slice][word]` for one side.
    pub fn compose(&self, slice: &SliceId, word: GlobalIndex, side: Side) -> Result<Vec<F>> {
        let pos = self.slice_position(slice)?;
        if word.get() >= self.vocab_len() {
            return Err(Error::InvalidInput(format!("word index {} out of range", word.0)));
        }
        Ok(self.compose_at(pos, word, side))
    }

    pub(crate) fn compose_at(&self, pos: usize, word: GlobalIndex, side: Side) -> Vec<F> {
        let central = self.central(side).row(word.get());
        if !self.is_member(pos, word) {
            return central.to_vec();
        }
        central
            .iter()
            .zip(self.drift(pos, side).row(word.get()))
            .map(|(c, d)| F::from_f64(c.to_f64() + d.to_f64()))
            .collect()
    }

    /// Composed vector in `f64` without rounding back to `F`.
    pub(crate) fn compose_f64(&self, pos: usize, word: GlobalIndex, side: Side, out: &mut [f64]) {
        let central = self.central(side).row(word.get());
        let drift = self.drift(pos, side).row(word.get());
        for ((o, c), d) in out.iter_mut().zip(central).zip(drift) {
            *o = c.to_f64() + d.to_f64();
        }
    }

    /// Dot product of the composed output vector of `output` with the
    /// composed input vector of `input`, both in slice `slice`.
    pub fn score_pair(
        &self,
        slice: &SliceId,
        input: GlobalIndex,
        output: GlobalIndex,
    ) -> Result<f64> {
        let pos = self.slice_position(slice)?;
        let n = self.vocab_len();
        if input.get() >= n || output.get() >= n {
            return Err(Error::InvalidInput("word index out of range".into()));
        }
        let mut v = vec![0.0; self.dim];
        let mut u = vec![0.0; self.dim];
        self.compose_f64(pos, input, Side::Input, &mut v);
        self.compose_f64(pos, output, Side::Output, &mut u);
        Ok(dot(&u, &v))
    }

    /// Checks that every drift row outside a slice vocabulary is exactly
    /// zero and every entry is finite.
    pub fn check_invariants(&self) -> Result<()> {
        for (pos, mask) in self.members.iter().enumerate() {
            for side in [Side::Input, Side::Output] {
                let drift = self.drift(pos, side);
                for (w, &member) in mask.iter().enumerate() {
                    if !member && drift.row(w).iter().any(|v| v.to_f64().to_bits() != 0) {
                        return Err(Error::InvalidInput(format!(
                            "drift row {w} of slice {} is nonzero outside its vocabulary",
                            self.slices[pos]
                        )));
                    }
                }
            }
        }
        let finite = (0..self.num_blocks())
            .all(|b| self.block(Block::from_ordinal(b)).as_slice().iter().all(|v| v.to_f64().is_finite()));
        if !finite {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    /// Converts every entry to another scalar type.
    pub fn cast<G: Scalar>(&self) -> EmbeddingTables<G> {
        EmbeddingTables {
            dim: self.dim,
            slices: self.slices.clone(),
            members: self.members.clone(),
            central_in: self.central_in.map(),
            central_out: self.central_out.map(),
            drift_in: self.drift_in.iter().map(Matrix::map).collect(),
            drift_out: self.drift_out.iter().map(Matrix::map).collect(),
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const INIT_SALT: u64 = 0x696e_6974;

/// Fresh tables for `vocab`: central rows uniform in
/// `[-init_scale/dim, init_scale/dim]`, all drift rows zero.
pub fn init_tables(
    config: &TrainingConfig,
    vocab: &VocabularyIndex,
) -> Result<(EmbeddingTables<f32>, OptimizerState<f32>)> {
    config.validate()?;
    let mut tables = EmbeddingTables::zeros(vocab, config.dim);
    let bound = config.init_scale / config.dim as f64;
    if bound > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ INIT_SALT);
        for block in [Block::CentralIn, Block::CentralOut] {
            for v in tables.block_mut(block).as_mut_slice() {
                *v = rng.random_range(-bound..=bound) as f32;
            }
        }
    }
    let state = OptimizerState::new(&tables);
    Ok((tables, state))
}
