//! Reconstruction training: the squared-ratio distortion loss, its exact
//! gradients, first-order optimizers and the training loop with early
//! stopping and hyperparameter sweeps.

mod config;
mod loss;
mod optim;
mod train;

pub use config::{BatchSize, OptimizerKind, SearchGrid, TrainConfig};
pub use loss::{batch_loss_and_grad, pair_loss};
pub use optim::{clip_global_norm, clip_global_norm_parts, Optimizer};
pub use train::{grid_search, train, train_from, GridRun, GridSearchOutcome, RunReport};
