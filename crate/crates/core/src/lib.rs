//! Crowd-size extraction from protest news: number-phrase parsing, a
//! rule-based span extractor, document shingling, a masked multitask span
//! kernel, and QA-style evaluation.

pub mod config;
pub mod corpus;
pub mod error;
pub mod heuristic;
pub mod kernel;
pub mod metrics;
pub mod quantity;
pub mod scalar;
pub mod shingle;
pub mod synthetic;

pub use config::Config;
pub use error::{Error, Result};
pub use scalar::Real;

pub type HiddenStatesF64 = kernel::HiddenStates<f64>;
pub type HiddenStatesF32 = kernel::HiddenStates<f32>;
pub type ToyModelF64 = kernel::ToyModel<f64>;
pub type ToyModelF32 = kernel::ToyModel<f32>;
pub type GradientsF64 = kernel::Gradients<f64>;
pub type GradientsF32 = kernel::Gradients<f32>;
pub type ShinglePredictionF64 = shingle::ShinglePrediction<f64>;
pub type ShinglePredictionF32 = shingle::ShinglePrediction<f32>;
/// Exact split proportions.
pub type SplitRatio = num_rational::Ratio<u64>;
