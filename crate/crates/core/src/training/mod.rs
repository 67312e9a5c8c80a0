//! Training: losses, the optimizer, dropout, configuration, and the
//! epoch loop.

pub mod adagrad;
pub mod config;
pub mod dropout;
pub mod loss;
pub mod trainer;

pub use adagrad::AdaGrad;
pub use config::{OptimSettings, TrainConfig, ValidConfig};
pub use dropout::DropoutCtx;
pub use loss::{
    classify_logits, example_loss, pair_logits, tree_loss, LossError,
};
pub use trainer::{evaluate, train, EpochRecord, EvalReport, TrainOutcome};
