//! Self-checks for the kernel: finite-difference gradient agreement and the
//! mask identities. Used by `kernel-check`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::model::{Supervision, ToyModel};
use super::ops::{build_mask, l1_penalty, HiddenStates, RegressionHead, SpanTargets};
use crate::error::Result;
use crate::scalar::Real;

/// Below this magnitude a gradient entry is compared absolutely.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-6;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_ERROR_FLOOR)
}

fn normal<R: Rng>(rng: &mut R, scale: f64) -> f64 {
    let v: f64 = rng.sample(StandardNormal);
    v * scale
}

/// A random toy model, hidden states and full supervision.
pub fn random_instance<T: Real, R: Rng>(
    rng: &mut R,
    n: usize,
    d: usize,
) -> Result<(ToyModel<T>, HiddenStates<T>, Supervision<T>)> {
    fn draw<T: Real, R: Rng>(rng: &mut R, len: usize, scale: f64) -> Vec<T> {
        (0..len).map(|_| T::lit(normal(rng, scale))).collect()
    }
    let hidden = HiddenStates::new(n, d, draw(rng, n * d, 1.0))?;
    let model = ToyModel {
        start_weights: draw(rng, d, 0.7),
        end_weights: draw(rng, d, 0.7),
        head: RegressionHead {
            w: draw(rng, d, 0.7),
            b: T::lit(normal(rng, 0.5)),
        },
    };
    let start = rng.random_range(0..n);
    let end = rng.random_range(start..n);
    let sup = Supervision {
        targets: Some(SpanTargets::new(start, end, n)?),
        coarse: Some(T::lit(rng.random_range(0.0..3.0))),
    };
    Ok((model, hidden, sup))
}

/// Central differences of the loss over every flattened parameter.
pub fn numeric_gradient<T: Real>(
    model: &ToyModel<T>,
    hidden: &HiddenStates<T>,
    sup: &Supervision<T>,
    lambda: T,
    eps: T,
) -> Result<Vec<T>> {
    let d = model.width();
    let theta = model.flatten();
    let mut out = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        let mut plus = theta.clone();
        let mut minus = theta.clone();
        plus[i] = plus[i] + eps;
        minus[i] = minus[i] - eps;
        let lp = ToyModel::from_flat(d, &plus)?.loss(hidden, sup, lambda)?;
        let lm = ToyModel::from_flat(d, &minus)?.loss(hidden, sup, lambda)?;
        out.push((lp - lm) / (eps + eps));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientCheckReport {
    pub instances: usize,
    pub lambdas: Vec<f64>,
    pub max_relative_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Seeded instances at each `lambda`; reports the worst relative error.
pub fn gradient_check(
    instances: usize,
    n: usize,
    d: usize,
    lambdas: &[f64],
    eps: f64,
    tolerance: f64,
    seed: u64,
) -> Result<GradientCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let (model, hidden, sup) = random_instance::<f64, _>(&mut rng, n, d)?;
        for &lambda in lambdas {
            let analytic = model.gradients(&hidden, &sup, lambda)?.flatten();
            let numeric = numeric_gradient(&model, &hidden, &sup, lambda, eps)?;
            for (a, m) in analytic.iter().zip(&numeric) {
                worst = worst.max(relative_error(*a, *m));
            }
        }
    }
    Ok(GradientCheckReport {
        instances,
        lambdas: lambdas.to_vec(),
        max_relative_error: worst,
        tolerance,
        passed: worst <= tolerance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskCheckReport {
    pub one_hot_cases: usize,
    pub one_hot_failures: usize,
    pub uniform_max_error: f64,
    pub random_bound_failures: usize,
    pub passed: bool,
}

/// Exhaustive one-hot indicator check at length `n`, the closed-form uniform
/// case, and the `[0, 1]` / `Σ ≤ n` bounds on random probability vectors.
pub fn mask_check(n: usize, random_cases: usize, seed: u64) -> Result<MaskCheckReport> {
    let mut cases = 0;
    let mut failures = 0;
    for start in 0..n {
        for end in start..n {
            cases += 1;
            let t = SpanTargets::new(start, end, n)?;
            let mask = build_mask(&t.x::<f64>(), &t.y::<f64>())?;
            let ok = mask
                .iter()
                .enumerate()
                .all(|(k, &m)| m == if (start..=end).contains(&k) { 1.0 } else { 0.0 })
                && l1_penalty(&mask) == (end - start + 1) as f64;
            if !ok {
                failures += 1;
            }
        }
    }

    let u = vec![1.0 / n as f64; n];
    let mask = build_mask(&u, &u)?;
    let nf = n as f64;
    let uniform_max_error = mask
        .iter()
        .enumerate()
        .map(|(k, &m)| (m - (k as f64 + 1.0) / nf * (nf - k as f64) / nf).abs())
        .fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bound_failures = 0;
    for _ in 0..random_cases {
        let logits: Vec<f64> = (0..n).map(|_| normal(&mut rng, 3.0)).collect();
        let logits2: Vec<f64> = (0..n).map(|_| normal(&mut rng, 3.0)).collect();
        let mask = build_mask(&super::softmax(&logits), &super::softmax(&logits2))?;
        let in_range = mask.iter().all(|&m| (0.0..=1.0 + 1e-12).contains(&m));
        if !in_range || l1_penalty(&mask) > nf + 1e-9 {
            bound_failures += 1;
        }
    }

    Ok(MaskCheckReport {
        one_hot_cases: cases,
        one_hot_failures: failures,
        uniform_max_error,
        random_bound_failures: bound_failures,
        passed: failures == 0 && uniform_max_error <= 1e-12 && bound_failures == 0,
    })
}
