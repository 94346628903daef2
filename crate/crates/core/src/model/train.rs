use log::{debug, info};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::objective::evaluate;
use super::{
    adam_step, clr_lr, init_tables, Batch, EmbeddingTables, Gradients, LossBreakdown,
    Regularization, TrainingConfig,
};
use crate::corpus::{
    build_slice_vocab, generate_pairs, merge_global_vocab, sample_negatives, stream_rng, GlobalIndex,
    NoiseDistribution, SliceCorpus, SliceId, TrainingPair, VocabularyIndex,
};
use crate::error::{Error, Result};

/// A trained model: configuration, vocabulary and tables.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    pub config: TrainingConfig,
    pub vocab: VocabularyIndex,
    pub tables: EmbeddingTables<f32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceEpochLoss {
    pub slice: SliceId,
    pub batches: usize,
    pub positives: usize,
    pub negatives: usize,
    /// Mean of the per-batch objective terms.
    pub loss: LossBreakdown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    /// Optimizer steps taken so far.
    pub steps: u64,
    pub slices: Vec<SliceEpochLoss>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub config: TrainingConfig,
    pub vocab_size: usize,
    pub slice_vocab_sizes: Vec<(SliceId, usize)>,
    pub epochs: Vec<EpochLog>,
}

/// Builds the vocabularies from `corpora` and trains on them.
pub fn train(corpora: &[SliceCorpus], config: &TrainingConfig) -> Result<(TrainedModel, TrainingLog)> {
    config.validate()?;
    let vocabs = corpora
        .iter()
        .map(|c| build_slice_vocab(c, config.slice_vocab))
        .collect::<Result<Vec<_>>>()?;
    let vocab = merge_global_vocab(vocabs)?;
    train_with_vocab(corpora, vocab, config)
}

/// Per-slice state of one epoch.
struct SliceRun {
    pos: usize,
    noise: NoiseDistribution,
    pairs: Vec<TrainingPair>,
    neg_rng: rand_chacha::ChaCha8Rng,
    totals: LossBreakdown,
    batches: usize,
    negatives: usize,
}

/// Trains on `corpora` with a prebuilt vocabulary. Every vocabulary slice
/// needs a corpus with the same id.
pub fn train_with_vocab(
    corpora: &[SliceCorpus],
    vocab: VocabularyIndex,
    config: &TrainingConfig,
) -> Result<(TrainedModel, TrainingLog)> {
    config.validate()?;
    let mut ordered: Vec<&SliceCorpus> = Vec::with_capacity(vocab.num_slices());
    for id in vocab.slice_ids() {
        let corpus = corpora
            .iter()
            .find(|c| &c.slice == id)
            .ok_or_else(|| Error::UnknownSlice(id.to_string()))?;
        ordered.push(corpus);
    }

    let reg = regularization(config, &vocab)?;
    let (mut tables, mut state) = init_tables(config, &vocab)?;
    let noises: Vec<NoiseDistribution> = vocab.slices().iter().map(NoiseDistribution::new).collect();
    let pool = (!config.deterministic && config.workers > 1)
        .then(|| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.workers)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))
        })
        .transpose()?;

    let mut log = TrainingLog {
        config: config.clone(),
        vocab_size: vocab.len(),
        slice_vocab_sizes: vocab.slices().iter().map(|v| (v.slice().clone(), v.len())).collect(),
        epochs: Vec::with_capacity(config.epochs),
    };
    info!(
        "training {} slices, |V| = {}, d = {}, window = {}, lambda = {:e}",
        vocab.num_slices(),
        vocab.len(),
        config.dim,
        config.window,
        config.lambda
    );

    for epoch in 0..config.epochs {
        let mut runs: Vec<SliceRun> = ordered
            .iter()
            .enumerate()
            .map(|(pos, corpus)| {
                let id = &corpus.slice;
                let mut pair_rng = stream_rng(config.seed, id, 2 * epoch as u64);
                let mut pairs = generate_pairs(
                    corpus,
                    &vocab.slices()[pos],
                    config.window,
                    config.subsample,
                    &mut pair_rng,
                );
                pairs.shuffle(&mut pair_rng);
                SliceRun {
                    pos,
                    noise: noises[pos].clone(),
                    pairs,
                    neg_rng: stream_rng(config.seed, id, 2 * epoch as u64 + 1),
                    totals: LossBreakdown::default(),
                    batches: 0,
                    negatives: 0,
                }
            })
            .collect();

        let rounds = runs
            .iter()
            .map(|r| r.pairs.len().div_ceil(config.batch_size))
            .max()
            .unwrap_or(0);
        for round in 0..rounds {
            // Slices with batches left in this round, in slice order.
            let mut batches = Vec::new();
            for run in runs.iter_mut() {
                let start = round * config.batch_size;
                if start >= run.pairs.len() {
                    continue;
                }
                let chunk = &run.pairs[start..(start + config.batch_size).min(run.pairs.len())];
                let negatives = sample_negatives(chunk, &run.noise, config.negative_ratio, &mut run.neg_rng);
                run.negatives += negatives.len();
                batches.push(to_batch(&vocab, run.pos, chunk, &negatives));
            }

            let diverged = |_| Error::NumericalDivergence { epoch, batch: round };
            match &pool {
                None => {
                    for batch in batches {
                        let (l, g) = evaluate(&tables, std::slice::from_ref(&batch), &reg, true)
                            .map_err(diverged)?;
                        let lr = clr_lr(state.step(), &config.clr);
                        adam_step(&mut state, &mut tables, &g.expect("gradient"), lr, &config.adam);
                        accumulate(&mut runs[batch.slice], l);
                    }
                }
                Some(pool) => {
                    let results = pool.install(|| parallel_evaluate(&tables, &batches, &reg));
                    let mut total = Gradients::new(tables.dim(), tables.num_blocks());
                    for (batch, result) in batches.iter().zip(results) {
                        let (l, g) = result.map_err(diverged)?;
                        total.merge(&g.expect("gradient"));
                        accumulate(&mut runs[batch.slice], l);
                    }
                    let lr = clr_lr(state.step(), &config.clr);
                    adam_step(&mut state, &mut tables, &total, lr, &config.adam);
                }
            }
        }

        if tables.check_invariants().is_err() {
            return Err(Error::NumericalDivergence { epoch, batch: rounds });
        }
        let entry = EpochLog {
            epoch,
            steps: state.step(),
            slices: runs
                .iter()
                .map(|r| {
                    let n = r.batches.max(1) as f64;
                    SliceEpochLoss {
                        slice: vocab.slices()[r.pos].slice().clone(),
                        batches: r.batches,
                        positives: r.pairs.len(),
                        negatives: r.negatives,
                        loss: LossBreakdown {
                            pos: r.totals.pos / n,
                            neg: r.totals.neg / n,
                            reg: r.totals.reg / n,
                            total: r.totals.total / n,
                        },
                    }
                })
                .collect(),
        };
        for s in &entry.slices {
            debug!(
                "epoch {epoch} slice {}: pos {:.5} neg {:.5} reg {:.3e}",
                s.slice, s.loss.pos, s.loss.neg, s.loss.reg
            );
        }
        log.epochs.push(entry);
    }

    Ok((
        TrainedModel {
            config: config.clone(),
            vocab,
            tables,
        },
        log,
    ))
}

fn accumulate(run: &mut SliceRun, l: LossBreakdown) {
    run.totals.pos += l.pos;
    run.totals.neg += l.neg;
    run.totals.reg += l.reg;
    run.totals.total += l.total;
    run.batches += 1;
}

fn parallel_evaluate(
    tables: &EmbeddingTables<f32>,
    batches: &[Batch],
    reg: &Regularization,
) -> Vec<Result<(LossBreakdown, Option<Gradients>)>> {
    use rayon::prelude::*;
    batches
        .par_iter()
        .map(|b| evaluate(tables, std::slice::from_ref(b), reg, true))
        .collect()
}

fn to_batch(
    vocab: &VocabularyIndex,
    pos: usize,
    positives: &[TrainingPair],
    negatives: &[TrainingPair],
) -> Batch {
    let global = |pairs: &[TrainingPair]| -> Vec<(GlobalIndex, GlobalIndex)> {
        pairs
            .iter()
            .map(|p| (vocab.to_global(pos, p.input), vocab.to_global(pos, p.output)))
            .collect()
    };
    Batch {
        slice: pos,
        positives: global(positives),
        negatives: global(negatives),
    }
}

fn regularization(config: &TrainingConfig, vocab: &VocabularyIndex) -> Result<Regularization> {
    let mut reg = Regularization::constant(config.lambda);
    reg.include_output = config.regularize_output;
    for o in &config.lambda_overrides {
        let slice = SliceId::new(o.slice.clone())?;
        let pos = vocab
            .slice_position(&slice)
            .ok_or_else(|| Error::UnknownSlice(o.slice.clone()))?;
        let word = vocab.index_of(&o.word).ok_or_else(|| Error::UnknownWord {
            slice: o.slice.clone(),
            word: o.word.clone(),
        })?;
        reg.overrides.insert((pos, word), o.lambda);
    }
    Ok(reg)
}
