//! Probabilistic gradient pruning and the optimizers it drives.

mod optimizer;
mod pruning;
mod train;

pub use optimizer::{cosine_lr, OptimizerConfig, OptimizerKind, OptimizerState};
pub use pruning::{sample_subset, Phase, PruningConfig, PruningMode, PruningState};
pub use train::{evaluate, step_cost, train, train_observed, MetricsRow, StepView, TrainConfig, TrainOutcome};
