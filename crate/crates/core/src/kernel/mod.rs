//! Framework-free numerics for the multitask span model: softmax start/end
//! heads, the cumulative-sum attention mask, its L1 penalty, masked max-pool
//! regression onto the coarse label, the combined loss and its analytic
//! gradient, plus a toy trainer.

pub mod check;
mod model;
mod ops;
mod toy;

pub use model::{Forward, Gradients, Supervision, ToyModel};
pub use ops::{
    build_mask, l1_penalty, masked_max_pool, predict_coarse, softmax, total_loss, HiddenStates,
    LossInputs, RegressionHead, SpanTargets, LOG_FLOOR,
};
pub use toy::{synthetic_dataset, toy_fit, SyntheticDoc, ToyConfig, TrainingTrace};
