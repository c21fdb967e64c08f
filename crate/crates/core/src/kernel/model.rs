use serde::{Deserialize, Serialize};

use super::ops::{
    build_mask, cumulative, dot, masked_max_pool, reverse_cumulative, softmax,
    total_loss, HiddenStates, LossInputs, RegressionHead, SpanTargets, LOG_FLOOR,
};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Linear span scorer plus regression head: start logits `H a`, end logits
/// `H c`, coarse label `w · colmax(mask ⊙ H) + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyModel<T> {
    pub start_weights: Vec<T>,
    pub end_weights: Vec<T>,
    pub head: RegressionHead<T>,
}

/// Supervision for one document. Either part may be missing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Supervision<T> {
    pub targets: Option<SpanTargets>,
    pub coarse: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forward<T> {
    pub start_probs: Vec<T>,
    pub end_probs: Vec<T>,
    pub mask: Vec<T>,
    pub pooled: Vec<T>,
    /// Row achieving each pooled maximum (first on ties).
    pub pooled_rows: Vec<usize>,
    pub coarse_pred: T,
}

/// Partial derivatives of the combined loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gradients<T> {
    pub start_weights: Vec<T>,
    pub end_weights: Vec<T>,
    pub w: Vec<T>,
    pub b: T,
}

impl<T: Real> Gradients<T> {
    pub fn flatten(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(3 * self.w.len() + 1);
        v.extend_from_slice(&self.start_weights);
        v.extend_from_slice(&self.end_weights);
        v.extend_from_slice(&self.w);
        v.push(self.b);
        v
    }
}

impl<T: Real> ToyModel<T> {
    pub fn zeros(d: usize) -> Self {
        ToyModel {
            start_weights: vec![T::zero(); d],
            end_weights: vec![T::zero(); d],
            head: RegressionHead {
                w: vec![T::zero(); d],
                b: T::zero(),
            },
        }
    }

    pub fn width(&self) -> usize {
        self.head.w.len()
    }

    /// Parameters as one vector: start weights, end weights, w, b.
    pub fn flatten(&self) -> Vec<T> {
        Gradients {
            start_weights: self.start_weights.clone(),
            end_weights: self.end_weights.clone(),
            w: self.head.w.clone(),
            b: self.head.b,
        }
        .flatten()
    }

    pub fn from_flat(d: usize, v: &[T]) -> Result<Self> {
        if v.len() != 3 * d + 1 {
            return Err(Error::Dimension(format!("{} parameters for width {d}", v.len())));
        }
        Ok(ToyModel {
            start_weights: v[..d].to_vec(),
            end_weights: v[d..2 * d].to_vec(),
            head: RegressionHead {
                w: v[2 * d..3 * d].to_vec(),
                b: v[3 * d],
            },
        })
    }

    fn check(&self, hidden: &HiddenStates<T>) -> Result<()> {
        let d = self.width();
        if hidden.cols() != d || self.start_weights.len() != d || self.end_weights.len() != d {
            return Err(Error::Dimension(format!(
                "model width {d} vs hidden width {}",
                hidden.cols()
            )));
        }
        if hidden.rows() == 0 {
            return Err(Error::Empty("hidden states"));
        }
        Ok(())
    }

    pub fn forward(&self, hidden: &HiddenStates<T>) -> Result<Forward<T>> {
        self.check(hidden)?;
        let start_probs = softmax(&hidden.matvec(&self.start_weights));
        let end_probs = softmax(&hidden.matvec(&self.end_weights));
        let mask = build_mask(&start_probs, &end_probs)?;
        let (pooled, pooled_rows) = masked_max_pool(&mask, hidden)?;
        let coarse_pred = dot(&self.head.w, &pooled) + self.head.b;
        Ok(Forward {
            start_probs,
            end_probs,
            mask,
            pooled,
            pooled_rows,
            coarse_pred,
        })
    }

    pub fn loss(&self, hidden: &HiddenStates<T>, sup: &Supervision<T>, lambda: T) -> Result<T> {
        let f = self.forward(hidden)?;
        loss_of(&f, sup, lambda)
    }

    /// Analytic gradient of [`ToyModel::loss`].
    pub fn gradients(&self, hidden: &HiddenStates<T>, sup: &Supervision<T>, lambda: T) -> Result<Gradients<T>> {
        let f = self.forward(hidden)?;
        Ok(self.backward(hidden, &f, sup, lambda))
    }

    /// Loss and gradient from a single forward pass.
    pub fn loss_and_gradients(
        &self,
        hidden: &HiddenStates<T>,
        sup: &Supervision<T>,
        lambda: T,
    ) -> Result<(T, Gradients<T>)> {
        let f = self.forward(hidden)?;
        let loss = loss_of(&f, sup, lambda)?;
        Ok((loss, self.backward(hidden, &f, sup, lambda)))
    }

    fn backward(&self, hidden: &HiddenStates<T>, f: &Forward<T>, sup: &Supervision<T>, lambda: T) -> Gradients<T> {
        let n = hidden.rows();
        let two = T::lit(2.0);
        let floor = T::lit(LOG_FLOOR);

        let dz = sup.coarse.map_or(T::zero(), |z| two * (f.coarse_pred - z));
        let dw: Vec<T> = f.pooled.iter().map(|&p| dz * p).collect();

        // d loss / d mask_k: L1 term plus the pooled entries that row k won.
        let mut dmask: Vec<T> = f
            .mask
            .iter()
            .map(|&m| if m > T::zero() { lambda } else if m < T::zero() { -lambda } else { T::zero() })
            .collect();
        for (j, &k) in f.pooled_rows.iter().enumerate() {
            dmask[k] = dmask[k] + dz * self.head.w[j] * hidden.get(k, j);
        }

        let prefix = cumulative(&f.start_probs);
        let suffix = reverse_cumulative(&f.end_probs);
        let d_prefix: Vec<T> = dmask.iter().zip(&suffix).map(|(&dm, &g)| dm * g).collect();
        let d_suffix: Vec<T> = dmask.iter().zip(&prefix).map(|(&dm, &p)| dm * p).collect();

        // mask uses prefix sums of start probs and suffix sums of end probs, so
        // the chain rule runs the other way round.
        let mut dstart = reverse_cumulative(&d_prefix);
        let mut dend = cumulative(&d_suffix);
        if let Some(t) = sup.targets {
            let ps = f.start_probs[t.start];
            if ps >= floor {
                dstart[t.start] = dstart[t.start] - ps.recip();
            }
            let pe = f.end_probs[t.end];
            if pe >= floor {
                dend[t.end] = dend[t.end] - pe.recip();
            }
        }
        debug_assert_eq!(dstart.len(), n);

        let dlogits_start = softmax_backward(&f.start_probs, &dstart);
        let dlogits_end = softmax_backward(&f.end_probs, &dend);

        Gradients {
            start_weights: hidden.t_matvec(&dlogits_start),
            end_weights: hidden.t_matvec(&dlogits_end),
            w: dw,
            b: dz,
        }
    }
}

fn loss_of<T: Real>(f: &Forward<T>, sup: &Supervision<T>, lambda: T) -> Result<T> {
    total_loss(
        &LossInputs {
            targets: sup.targets,
            start_probs: &f.start_probs,
            end_probs: &f.end_probs,
            coarse: sup.coarse,
            coarse_pred: f.coarse_pred,
            lambda,
        },
        &f.mask,
    )
}

fn softmax_backward<T: Real>(probs: &[T], upstream: &[T]) -> Vec<T> {
    let inner = dot(probs, upstream);
    probs.iter().zip(upstream).map(|(&p, &g)| p * (g - inner)).collect()
}
