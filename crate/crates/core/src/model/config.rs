use serde::{Deserialize, Serialize};

use crate::corpus::NegativeRatio;
use crate::error::{Error, Result};

/// Adam moment decay rates and denominator guard.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Triangular cyclical learning-rate schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClrConfig {
    pub base_lr: f64,
    pub max_lr: f64,
    pub cycle_steps: u64,
}

impl Default for ClrConfig {
    fn default() -> Self {
        ClrConfig {
            base_lr: 1e-4,
            max_lr: 1e-2,
            cycle_steps: 2000,
        }
    }
}

/// Drift penalty for one (slice, word) that differs from the global lambda.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaOverride {
    pub slice: String,
    pub word: String,
    pub lambda: f64,
}

/// Every knob of a training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    /// Embedding dimension.
    pub dim: usize,
    /// Context window half-width.
    pub window: usize,
    /// Weight of the L2 penalty on the input drift vectors.
    pub lambda: f64,
    /// Per-(slice, word) penalties; words not listed use `lambda`.
    pub lambda_overrides: Vec<LambdaOverride>,
    /// Also penalize the output-side drift vectors.
    pub regularize_output: bool,
    pub negative_ratio: NegativeRatio,
    /// Subsampling factor; `None` keeps every token.
    pub subsample: Option<f64>,
    /// Maximum vocabulary size of each slice.
    pub slice_vocab: usize,
    pub epochs: usize,
    /// Positive pairs per optimizer step.
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub clr: ClrConfig,
    pub seed: u64,
    /// Central tables start uniform in `[-init_scale/dim, init_scale/dim]`.
    pub init_scale: f64,
    /// Worker threads for parallel mode.
    pub workers: usize,
    /// Single-worker, bit-reproducible training.
    pub deterministic: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            dim: 48,
            window: 4,
            lambda: 1e-9,
            lambda_overrides: Vec::new(),
            regularize_output: false,
            negative_ratio: NegativeRatio::default(),
            subsample: Some(1e-5),
            slice_vocab: 20_000,
            epochs: 5,
            batch_size: 512,
            adam: AdamConfig::default(),
            clr: ClrConfig::default(),
            seed: 1,
            init_scale: 0.5,
            workers: 1,
            deterministic: true,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidConfig(msg.to_owned()));
        if self.dim == 0 {
            return fail("dim must be >= 1");
        }
        if self.window == 0 {
            return fail("window must be >= 1");
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return fail("lambda must be finite and >= 0");
        }
        if self
            .lambda_overrides
            .iter()
            .any(|o| !(o.lambda.is_finite() && o.lambda >= 0.0))
        {
            return fail("lambda overrides must be finite and >= 0");
        }
        if let Some(t) = self.subsample {
            if !(t.is_finite() && t > 0.0) {
                return fail("subsample factor must be > 0");
            }
        }
        if self.slice_vocab == 0 {
            return fail("slice_vocab must be >= 1");
        }
        if self.batch_size == 0 {
            return fail("batch_size must be >= 1");
        }
        let AdamConfig {
            beta1,
            beta2,
            epsilon,
        } = self.adam;
        if !((0.0..1.0).contains(&beta1) && (0.0..1.0).contains(&beta2)) {
            return fail("adam betas must lie in [0, 1)");
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return fail("adam epsilon must be > 0");
        }
        let ClrConfig {
            base_lr,
            max_lr,
            cycle_steps,
        } = self.clr;
        if !(base_lr > 0.0 && max_lr.is_finite() && base_lr <= max_lr) {
            return fail("learning rates must satisfy 0 < base_lr <= max_lr");
        }
        if cycle_steps < 2 {
            return fail("cycle_steps must be >= 2");
        }
        if !(self.init_scale.is_finite() && self.init_scale >= 0.0) {
            return fail("init_scale must be finite and >= 0");
        }
        if self.workers == 0 {
            return fail("workers must be >= 1");
        }
        Ok(())
    }
}
