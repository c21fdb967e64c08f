use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Floor applied to probabilities before taking logs.
pub const LOG_FLOOR: f64 = 1e-12;

/// Max-subtracted softmax.
pub fn softmax<T: Real>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|&l| (l - max).exp()).collect();
    let total: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// `mask_k = (sum_{i<=k} start_i) * (sum_{i>=k} end_i)`.
pub fn build_mask<T: Real>(start_probs: &[T], end_probs: &[T]) -> Result<Vec<T>> {
    if start_probs.len() != end_probs.len() {
        return Err(Error::Dimension(format!(
            "start probabilities have length {}, end probabilities {}",
            start_probs.len(),
            end_probs.len()
        )));
    }
    let prefix = cumulative(start_probs);
    let suffix = reverse_cumulative(end_probs);
    Ok(prefix.into_iter().zip(suffix).map(|(f, g)| f * g).collect())
}

pub(crate) fn cumulative<T: Real>(v: &[T]) -> Vec<T> {
    v.iter()
        .scan(T::zero(), |acc, &x| {
            *acc = *acc + x;
            Some(*acc)
        })
        .collect()
}

pub(crate) fn reverse_cumulative<T: Real>(v: &[T]) -> Vec<T> {
    let mut out: Vec<T> = v
        .iter()
        .rev()
        .scan(T::zero(), |acc, &x| {
            *acc = *acc + x;
            Some(*acc)
        })
        .collect();
    out.reverse();
    out
}

pub fn l1_penalty<T: Real>(mask: &[T]) -> T {
    mask.iter().map(|m| m.abs()).sum()
}

/// Token hidden states, `n` rows by `d` columns, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenStates<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> HiddenStates<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("non-finite hidden state".into()));
        }
        Ok(HiddenStates { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged hidden-state rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    /// `H v`, one value per row.
    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `H^T u`, one value per column.
    pub fn t_matvec(&self, u: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.cols];
        for (i, &ui) in u.iter().enumerate() {
            for (o, &h) in out.iter_mut().zip(self.row(i)) {
                *o = *o + ui * h;
            }
        }
        out
    }
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionHead<T> {
    pub w: Vec<T>,
    pub b: T,
}

/// Column-wise max over tokens of `mask ⊙ H`, with the first row attaining
/// each maximum.
pub fn masked_max_pool<T: Real>(mask: &[T], hidden: &HiddenStates<T>) -> Result<(Vec<T>, Vec<usize>)> {
    if mask.len() != hidden.rows() {
        return Err(Error::Dimension(format!(
            "mask length {} vs {} hidden rows",
            mask.len(),
            hidden.rows()
        )));
    }
    if mask.is_empty() {
        return Err(Error::Empty("mask"));
    }
    let d = hidden.cols();
    let mut pooled = vec![T::neg_infinity(); d];
    let mut argmax = vec![0; d];
    for (k, &m) in mask.iter().enumerate() {
        for (j, &h) in hidden.row(k).iter().enumerate() {
            let v = m * h;
            if v > pooled[j] {
                pooled[j] = v;
                argmax[j] = k;
            }
        }
    }
    Ok((pooled, argmax))
}

/// `w · colmax(mask ⊙ H) + b`. Unbounded regression output.
pub fn predict_coarse<T: Real>(mask: &[T], hidden: &HiddenStates<T>, head: &RegressionHead<T>) -> Result<T> {
    if head.w.len() != hidden.cols() {
        return Err(Error::Dimension(format!(
            "head width {} vs hidden width {}",
            head.w.len(),
            hidden.cols()
        )));
    }
    let (pooled, _) = masked_max_pool(mask, hidden)?;
    Ok(dot(&head.w, &pooled) + head.b)
}

/// Answer start/end positions; `(0, 0)` encodes "no answer".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanTargets {
    pub start: usize,
    pub end: usize,
    pub len: usize,
}

impl SpanTargets {
    pub fn new(start: usize, end: usize, len: usize) -> Result<Self> {
        if start > end || end >= len {
            return Err(Error::Domain(format!("bad span {start}..={end} for length {len}")));
        }
        Ok(SpanTargets { start, end, len })
    }

    pub fn impossible(len: usize) -> Result<Self> {
        Self::new(0, 0, len)
    }

    fn indicator<T: Real>(&self, at: usize) -> Vec<T> {
        (0..self.len).map(|i| if i == at { T::one() } else { T::zero() }).collect()
    }

    /// Start indicator vector.
    pub fn x<T: Real>(&self) -> Vec<T> {
        self.indicator(self.start)
    }

    /// End indicator vector.
    pub fn y<T: Real>(&self) -> Vec<T> {
        self.indicator(self.end)
    }
}

/// Every symbol the combined loss reads. Either supervision signal may be
/// absent, which drops its term.
#[derive(Debug, Clone, Copy)]
pub struct LossInputs<'a, T> {
    pub targets: Option<SpanTargets>,
    pub start_probs: &'a [T],
    pub end_probs: &'a [T],
    pub coarse: Option<T>,
    pub coarse_pred: T,
    pub lambda: T,
}

pub(crate) fn floored_ln<T: Real>(p: T) -> T {
    p.max(T::lit(LOG_FLOOR)).ln()
}

/// `-Σ(x log x̂ + y log ŷ) + (ẑ - z)² + λ·|mask|₁`.
pub fn total_loss<T: Real>(inputs: &LossInputs<'_, T>, mask: &[T]) -> Result<T> {
    let n = inputs.start_probs.len();
    if inputs.end_probs.len() != n || mask.len() != n {
        return Err(Error::Dimension(format!(
            "loss vectors disagree: start {n}, end {}, mask {}",
            inputs.end_probs.len(),
            mask.len()
        )));
    }
    if inputs.lambda < T::zero() {
        return Err(Error::Domain("negative mask penalty weight".into()));
    }
    let mut loss = inputs.lambda * l1_penalty(mask);
    if let Some(t) = inputs.targets {
        if t.len != n {
            return Err(Error::Dimension(format!("targets for length {}, vectors {n}", t.len)));
        }
        loss = loss - floored_ln(inputs.start_probs[t.start]) - floored_ln(inputs.end_probs[t.end]);
    }
    if let Some(z) = inputs.coarse {
        let r = inputs.coarse_pred - z;
        loss = loss + r * r;
    }
    Ok(loss)
}
