//! Coarse-label-only training on synthetic documents with a planted span.
//!
//! Each document is `n x d` standard-normal noise with a contiguous run of
//! 2-5 rows shifted along a fixed unit direction by `(label + 1)`. The model
//! only ever sees the label, so any concentration of the mask on the planted
//! rows is learned through the regression head alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::model::{Supervision, ToyModel};
use super::ops::HiddenStates;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToyConfig {
    pub docs: usize,
    pub seq_len: usize,
    pub hidden: usize,
    pub steps: usize,
    pub lr: f64,
    pub lambda: f64,
    pub seed: u64,
    pub min_span: usize,
    pub max_span: usize,
    /// Std-dev of the per-entry background noise.
    pub noise_scale: f64,
    /// Std-dev of the random parameter initialisation.
    pub init_scale: f64,
}

impl Default for ToyConfig {
    fn default() -> Self {
        ToyConfig {
            docs: 40,
            seq_len: 32,
            hidden: 8,
            steps: 500,
            lr: 0.05,
            lambda: 0.01,
            seed: 0,
            min_span: 2,
            max_span: 5,
            noise_scale: 1.0,
            init_scale: 0.1,
        }
    }
}

impl ToyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.docs == 0 || self.hidden == 0 {
            return Err(Error::config("toy run needs at least one document and hidden unit"));
        }
        if self.min_span == 0 || self.min_span > self.max_span || self.max_span > self.seq_len {
            return Err(Error::config(format!(
                "planted span {}..={} does not fit sequence length {}",
                self.min_span, self.max_span, self.seq_len
            )));
        }
        if !(self.noise_scale.is_finite() && self.noise_scale >= 0.0 && self.init_scale.is_finite() && self.init_scale >= 0.0) {
            return Err(Error::config("noise and init scales must be finite and nonnegative"));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) || !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::config("learning rate must be positive and lambda nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDoc<T> {
    pub hidden: HiddenStates<T>,
    pub label: u8,
    /// Planted rows, half-open.
    pub span: (usize, usize),
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// The planted direction and the documents, drawn from one seeded stream.
pub fn synthetic_dataset<T: Real>(cfg: &ToyConfig, rng: &mut ChaCha8Rng) -> Result<(Vec<f64>, Vec<SyntheticDoc<T>>)> {
    let d = cfg.hidden;
    let raw: Vec<f64> = (0..d).map(|_| gaussian(rng)).collect();
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    let direction: Vec<f64> = raw.iter().map(|x| x / norm).collect();

    let mut docs = Vec::with_capacity(cfg.docs);
    for _ in 0..cfg.docs {
        let label: u8 = rng.random_range(0..=3);
        let len = rng.random_range(cfg.min_span..=cfg.max_span);
        let start = rng.random_range(0..=cfg.seq_len - len);
        let mut values: Vec<f64> = (0..cfg.seq_len * d).map(|_| gaussian(rng) * cfg.noise_scale).collect();
        let shift = f64::from(label) + 1.0;
        for row in start..start + len {
            for (j, u) in direction.iter().enumerate() {
                values[row * d + j] += shift * u;
            }
        }
        let hidden = HiddenStates::new(cfg.seq_len, d, values.into_iter().map(T::lit).collect())?;
        docs.push(SyntheticDoc {
            hidden,
            label,
            span: (start, start + len),
        });
    }
    Ok((direction, docs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub config: ToyConfig,
    /// Mean loss before each step, then once more after the last.
    pub loss: Vec<f64>,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub planted_spans: Vec<(usize, usize)>,
    pub final_masks: Vec<Vec<f64>>,
    /// Per document: mask mass on planted rows over total mask mass.
    pub planted_mass: Vec<f64>,
    pub mean_planted_mass: f64,
    pub final_model: ToyModel<f64>,
}

fn mean_loss_and_grad<T: Real>(
    model: &ToyModel<T>,
    docs: &[SyntheticDoc<T>],
    lambda: T,
) -> Result<(T, Vec<T>)> {
    let mut total = T::zero();
    let mut grad = vec![T::zero(); 3 * model.width() + 1];
    for doc in docs {
        let sup = Supervision {
            targets: None,
            coarse: Some(T::lit(f64::from(doc.label))),
        };
        let (l, g) = model.loss_and_gradients(&doc.hidden, &sup, lambda)?;
        total = total + l;
        for (acc, gi) in grad.iter_mut().zip(g.flatten()) {
            *acc = *acc + gi;
        }
    }
    let count = T::lit(docs.len() as f64);
    Ok((total / count, grad.into_iter().map(|g| g / count).collect()))
}

/// Full-batch gradient descent on the coarse-label and mask-penalty terms.
pub fn toy_fit<T: Real>(cfg: &ToyConfig) -> Result<TrainingTrace> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (_, docs) = synthetic_dataset::<T>(cfg, &mut rng)?;

    let d = cfg.hidden;
    let init: Vec<T> = (0..3 * d + 1)
        .map(|_| T::lit(gaussian(&mut rng) * cfg.init_scale))
        .collect();
    let mut model = ToyModel::from_flat(d, &init)?;
    let lr = T::lit(cfg.lr);
    let lambda = T::lit(cfg.lambda);

    let mut losses = Vec::with_capacity(cfg.steps + 1);
    for _ in 0..cfg.steps {
        let (loss, grad) = mean_loss_and_grad(&model, &docs, lambda)?;
        losses.push(loss.to_f64_lossy());
        let theta: Vec<T> = model.flatten().into_iter().zip(&grad).map(|(p, &g)| p - lr * g).collect();
        model = ToyModel::from_flat(d, &theta)?;
    }
    let (final_loss, _) = mean_loss_and_grad(&model, &docs, lambda)?;
    losses.push(final_loss.to_f64_lossy());

    let mut final_masks = Vec::with_capacity(docs.len());
    let mut planted_mass = Vec::with_capacity(docs.len());
    for doc in &docs {
        let mask: Vec<f64> = model.forward(&doc.hidden)?.mask.into_iter().map(Real::to_f64_lossy).collect();
        let total: f64 = mask.iter().sum();
        let inside: f64 = mask[doc.span.0..doc.span.1].iter().sum();
        planted_mass.push(if total > 0.0 { inside / total } else { 0.0 });
        final_masks.push(mask);
    }
    let mean_planted_mass = planted_mass.iter().sum::<f64>() / planted_mass.len() as f64;

    Ok(TrainingTrace {
        config: cfg.clone(),
        initial_loss: losses[0],
        final_loss: *losses.last().expect("nonempty"),
        loss: losses,
        planted_spans: docs.iter().map(|d| d.span).collect(),
        final_masks,
        planted_mass,
        mean_planted_mass,
        final_model: ToyModel::from_flat(
            d,
            &model.flatten().into_iter().map(Real::to_f64_lossy).collect::<Vec<_>>(),
        )?,
    })
}
