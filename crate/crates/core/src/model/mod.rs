//! Embedding tables, the regularized skip-gram objective, optimization and
//! persistence.

mod config;
mod export;
mod io;
mod objective;
mod optim;
mod tables;
mod train;

pub use config::{AdamConfig, ClrConfig, LambdaOverride, TrainingConfig};
pub use export::{read_embeddings, read_json, read_tsv_dir, write_json, write_tsv_dir, ExportFormat};
pub use io::{load_model, read_model, save_model, write_model, FORMAT_VERSION, MAGIC};
pub use objective::{evaluate, gradients, loss, Batch, Gradients, LossBreakdown, Regularization};
pub use optim::{adam_step, clr_lr, OptimizerState};
pub use tables::{init_tables, Block, EmbeddingTables, Matrix, Scalar, Side};
pub use train::{
    train, train_with_vocab, EpochLog, SliceEpochLoss, TrainedModel, TrainingLog,
};
