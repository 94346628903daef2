//! Multi-source word embeddings.
//!
//! Every word gets one central vector shared by all corpus slices plus a
//! per-slice drift vector, so the slice representation is
//! `v[s, w] = central[w] + delta[s, w]`. The drift is trained jointly with
//! the central vectors under a skip-gram negative-sampling objective with an
//! L2 penalty on the drift, which keeps the slices in one common space
//! without any post-hoc alignment.
//!
//! The crate is split into:
//!
//! * [`corpus`]: tokenization, per-slice and global vocabularies, noise
//!   distributions and training-pair generation.
//! * [`model`]: embedding tables, the regularized objective and its
//!   gradients, Adam with a cyclical learning rate, the training loop and
//!   model persistence.
//! * [`eval`]: clustering metrics (NMI, F-beta), spherical k-means,
//!   alignment retrieval metrics (MP@k, MRR) and drift analysis tools.
//! * [`cli`]: the `mw2v` command-line front end.
//! * [`synthetic`]: small generated corpora with known drift, used by the
//!   tests and handy for smoke-testing a build.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod model;
pub mod synthetic;

pub use error::{Error, Result};
