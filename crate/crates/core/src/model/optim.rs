use super::{AdamConfig, Block, ClrConfig, EmbeddingTables, Gradients, Scalar};

/// Adam moment estimates for every parameter, in block order.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState<F = f32> {
    first: Vec<Vec<F>>,
    second: Vec<Vec<F>>,
    step: u64,
}

impl<F: Scalar> OptimizerState<F> {
    pub fn new(tables: &EmbeddingTables<F>) -> Self {
        let sizes: Vec<usize> = (0..tables.num_blocks())
            .map(|b| tables.block(Block::from_ordinal(b)).as_slice().len())
            .collect();
        OptimizerState {
            first: sizes.iter().map(|&n| vec![F::default(); n]).collect(),
            second: sizes.iter().map(|&n| vec![F::default(); n]).collect(),
            step: 0,
        }
    }

    /// Number of updates applied so far.
    pub fn step(&self) -> u64 {
        self.step
    }
}

/// Triangular cyclical learning rate: linear from `base_lr` up to `max_lr`
/// over the first half of each cycle, back down over the second half.
pub fn clr_lr(step: u64, clr: &ClrConfig) -> f64 {
    let cycle = clr.cycle_steps.max(2) as f64;
    let half = cycle / 2.0;
    let pos = (step % clr.cycle_steps.max(2)) as f64;
    let frac = if pos <= half {
        pos / half
    } else {
        (cycle - pos) / (cycle - half)
    };
    clr.base_lr + (clr.max_lr - clr.base_lr) * frac
}

/// One bias-corrected Adam step that moves the parameters *up* the
/// gradient (the objective is maximized).
///
/// Every parameter is updated, as in dense Adam; parameters whose moments
/// are both zero (never touched) are left bit-for-bit unchanged.
pub fn adam_step<F: Scalar>(
    state: &mut OptimizerState<F>,
    tables: &mut EmbeddingTables<F>,
    grads: &Gradients,
    lr: f64,
    adam: &AdamConfig,
) {
    state.step += 1;
    let t = state.step as i32;
    let AdamConfig {
        beta1,
        beta2,
        epsilon,
    } = *adam;
    let bias1 = 1.0 - beta1.powi(t);
    let bias2 = 1.0 - beta2.powi(t);
    let dim = tables.dim();

    for b in 0..tables.num_blocks() {
        let block = Block::from_ordinal(b);
        let params = tables.block_mut(block).as_mut_slice();
        let m = &mut state.first[b];
        let v = &mut state.second[b];
        for row in 0..params.len() / dim.max(1) {
            let grad = grads.row(block, row);
            let range = row * dim..(row + 1) * dim;
            for (k, i) in range.enumerate() {
                let g = grad.map_or(0.0, |g| g[k]);
                let (mi, vi) = (m[i].to_f64(), v[i].to_f64());
                if g == 0.0 && mi == 0.0 && vi == 0.0 {
                    continue;
                }
                let mi = beta1 * mi + (1.0 - beta1) * g;
                let vi = beta2 * vi + (1.0 - beta2) * g * g;
                m[i] = F::from_f64(mi);
                v[i] = F::from_f64(vi);
                let update = lr * (mi / bias1) / ((vi / bias2).sqrt() + epsilon);
                params[i] = F::from_f64(params[i].to_f64() + update);
            }
        }
    }
}
