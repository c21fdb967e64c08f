//! Fixed-width token windows over long documents, the padded sequence layout
//! each window is scored in, and per-document aggregation of window-level
//! span predictions.

use std::collections::HashMap;
use std::ops::Range;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantity::Token;

pub const DEFAULT_WIDTH: usize = 450;
pub const DEFAULT_STRIDE: usize = 225;
pub const DEFAULT_SEQ_LEN: usize = 512;
pub const DEFAULT_QUESTION_BUDGET: usize = 62;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shingle {
    pub doc_id: String,
    pub shingle_index: usize,
    pub window_start: usize,
    pub window_end: usize,
}

impl Shingle {
    pub fn window(&self) -> Range<usize> {
        self.window_start..self.window_end
    }

    pub fn record(&self, tokens: &[Token]) -> ShingleRecord {
        ShingleRecord {
            doc_id: self.doc_id.clone(),
            shingle_index: self.shingle_index,
            window_start: self.window_start,
            token_texts: tokens[self.window()].iter().map(|t| t.text.clone()).collect(),
        }
    }
}

/// Serialized form of a shingle with its token strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShingleRecord {
    pub doc_id: String,
    pub shingle_index: usize,
    pub window_start: usize,
    pub token_texts: Vec<String>,
}

/// Window start positions: 0, S, 2S, ... with the last one pulled back to
/// `len - W` so every window is exactly `W` wide and the final one ends on
/// the last token.
pub fn window_starts(len: usize, width: usize, stride: usize) -> Result<Vec<usize>> {
    if width == 0 || stride == 0 || stride > width {
        return Err(Error::config(format!(
            "invalid shingle geometry: width {width}, stride {stride}"
        )));
    }
    if len <= width {
        return Ok(vec![0]);
    }
    let last = len - width;
    let mut starts: Vec<usize> = (0..last).step_by(stride).collect();
    starts.push(last);
    Ok(starts)
}

pub fn make_shingles(doc_id: &str, tokens: &[Token], width: usize, stride: usize) -> Result<Vec<Shingle>> {
    let len = tokens.len();
    Ok(window_starts(len, width, stride)?
        .into_iter()
        .enumerate()
        .map(|(i, start)| Shingle {
            doc_id: doc_id.to_string(),
            shingle_index: i,
            window_start: start,
            window_end: (start + width).min(len),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceLimits {
    pub seq_len: usize,
    pub max_context: usize,
    pub max_question: usize,
}

impl Default for SequenceLimits {
    fn default() -> Self {
        SequenceLimits {
            seq_len: DEFAULT_SEQ_LEN,
            max_context: DEFAULT_WIDTH,
            max_question: DEFAULT_QUESTION_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    SequenceStart,
    Question(usize),
    Separator,
    /// Holds a document token index.
    Context(usize),
    Padding,
}

/// `[start][question][sep][context][padding]`, exactly `seq_len` slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceLayout {
    slots: Vec<Slot>,
    context: Range<usize>,
    context_offset: usize,
}

impl SequenceLayout {
    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn padding(&self) -> usize {
        self.slots.iter().filter(|s| **s == Slot::Padding).count()
    }

    pub fn slot_of(&self, doc_token: usize) -> Option<usize> {
        self.context
            .contains(&doc_token)
            .then(|| self.context_offset + doc_token - self.context.start)
    }

    pub fn token_at(&self, slot: usize) -> Option<usize> {
        match self.slots.get(slot) {
            Some(Slot::Context(t)) => Some(*t),
            _ => None,
        }
    }
}

/// Lays a context window (document token indices) and a question out into a
/// fixed-length padded sequence.
pub fn layout_sequence(
    context: Range<usize>,
    question_len: usize,
    limits: &SequenceLimits,
) -> Result<SequenceLayout> {
    let ctx_len = context.len();
    if ctx_len == 0 {
        return Err(Error::config("empty context"));
    }
    if ctx_len > limits.max_context {
        return Err(Error::config(format!(
            "context of {ctx_len} tokens exceeds {}; shingle first",
            limits.max_context
        )));
    }
    if question_len > limits.max_question {
        return Err(Error::config(format!(
            "question of {question_len} tokens exceeds {}",
            limits.max_question
        )));
    }
    let used = 2 + question_len + ctx_len;
    if used > limits.seq_len {
        return Err(Error::config(format!(
            "{used} slots needed but the sequence holds {}",
            limits.seq_len
        )));
    }
    let mut slots = Vec::with_capacity(limits.seq_len);
    slots.push(Slot::SequenceStart);
    slots.extend((0..question_len).map(Slot::Question));
    slots.push(Slot::Separator);
    let context_offset = slots.len();
    slots.extend(context.clone().map(Slot::Context));
    slots.resize(limits.seq_len, Slot::Padding);
    Ok(SequenceLayout {
        slots,
        context,
        context_offset,
    })
}

/// Start/end score vectors for one shingle's padded sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShinglePrediction<T = f64> {
    pub doc_id: String,
    pub shingle_index: usize,
    pub start_scores: Vec<T>,
    pub end_scores: Vec<T>,
}

fn argmax_first<T: Float>(v: &[T]) -> (usize, T) {
    v.iter()
        .copied()
        .enumerate()
        .fold((0, T::neg_infinity()), |best, (i, x)| if x > best.1 { (i, x) } else { best })
}

impl<T: Float> ShinglePrediction<T> {
    pub fn validate(&self, seq_len: usize) -> Result<()> {
        let tol = T::from(1e-4).unwrap();
        for (name, v) in [("start", &self.start_scores), ("end", &self.end_scores)] {
            if v.len() != seq_len {
                return Err(Error::Dimension(format!(
                    "{} shingle {}: {name} scores have length {}, expected {seq_len}",
                    self.doc_id,
                    self.shingle_index,
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite() || *x < T::zero() || *x > T::one()) {
                return Err(Error::validation(format!(
                    "{} shingle {}: {name} scores outside [0, 1]",
                    self.doc_id, self.shingle_index
                )));
            }
            let sum = v.iter().fold(T::zero(), |a, &x| a + x);
            if (sum - T::one()).abs() > tol {
                return Err(Error::validation(format!(
                    "{} shingle {}: {name} scores do not sum to 1",
                    self.doc_id, self.shingle_index
                )));
            }
        }
        Ok(())
    }

    /// `max(start) + max(end)`.
    pub fn confidence(&self) -> T {
        argmax_first(&self.start_scores).1 + argmax_first(&self.end_scores).1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregatedSpan {
    pub doc_id: String,
    pub shingle_index: usize,
    pub is_impossible: bool,
    /// Inclusive document token indices.
    pub start_token: Option<usize>,
    pub end_token: Option<usize>,
    pub start_char: Option<usize>,
    pub end_char: Option<usize>,
    pub span_text: Option<String>,
}

/// Picks the shingle with the greatest `max(start) + max(end)` (lowest
/// shingle index on exact ties) and maps its argmax span back to document
/// tokens and chars. Both argmaxes on the sequence-start slot means no
/// answer; so does any argmax outside the context or an inverted span.
pub fn aggregate_predictions<T: Float>(
    predictions: &[ShinglePrediction<T>],
    shingles: &[Shingle],
    question_len: usize,
    limits: &SequenceLimits,
    tokens: &[Token],
    text: &str,
) -> Result<AggregatedSpan> {
    if predictions.is_empty() {
        return Err(Error::Empty("shingle predictions"));
    }
    let by_index: HashMap<usize, &Shingle> = shingles.iter().map(|s| (s.shingle_index, s)).collect();
    let mut best: Option<(&ShinglePrediction<T>, T)> = None;
    for p in predictions {
        p.validate(limits.seq_len)?;
        match by_index.get(&p.shingle_index) {
            Some(s) if s.doc_id == p.doc_id => {}
            _ => {
                return Err(Error::validation(format!(
                    "no shingle {} for document {}",
                    p.shingle_index, p.doc_id
                )))
            }
        }
        let c = p.confidence();
        let better = match best {
            None => true,
            Some((b, bc)) => c > bc || (c == bc && p.shingle_index < b.shingle_index),
        };
        if better {
            best = Some((p, c));
        }
    }
    let (pred, _) = best.expect("nonempty");
    let shingle = by_index[&pred.shingle_index];

    let mut out = AggregatedSpan {
        doc_id: pred.doc_id.clone(),
        shingle_index: pred.shingle_index,
        is_impossible: true,
        start_token: None,
        end_token: None,
        start_char: None,
        end_char: None,
        span_text: None,
    };
    let start_slot = argmax_first(&pred.start_scores).0;
    let end_slot = argmax_first(&pred.end_scores).0;
    if start_slot == 0 && end_slot == 0 {
        return Ok(out);
    }
    let layout = layout_sequence(shingle.window(), question_len, limits)?;
    if let (Some(s), Some(e)) = (layout.token_at(start_slot), layout.token_at(end_slot)) {
        if s <= e {
            let (first, last) = (&tokens[s], &tokens[e]);
            out.is_impossible = false;
            out.start_token = Some(s);
            out.end_token = Some(e);
            out.start_char = Some(first.start_char);
            out.end_char = Some(last.end_char);
            out.span_text = Some(text[first.bytes.start..last.bytes.end].to_string());
        }
    }
    Ok(out)
}

/// A fixed scorer for tests and baselines: puts `peak` mass on one start and
/// one end slot and spreads the rest evenly. The default always answers
/// "impossible".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantScorer {
    pub start_slot: usize,
    pub end_slot: usize,
    pub peak: f64,
}

impl Default for ConstantScorer {
    fn default() -> Self {
        ConstantScorer {
            start_slot: 0,
            end_slot: 0,
            peak: 0.9,
        }
    }
}

impl ConstantScorer {
    fn vector(&self, slot: usize, n: usize) -> Vec<f64> {
        let rest = (1.0 - self.peak) / (n - 1).max(1) as f64;
        (0..n).map(|i| if i == slot { self.peak } else { rest }).collect()
    }

    pub fn score(&self, shingle: &Shingle, seq_len: usize) -> ShinglePrediction {
        ShinglePrediction {
            doc_id: shingle.doc_id.clone(),
            shingle_index: shingle.shingle_index,
            start_scores: self.vector(self.start_slot, seq_len),
            end_scores: self.vector(self.end_slot, seq_len),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantity::tokenize;

    fn one_hot(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    #[test]
    fn starts() {
        assert_eq!(window_starts(450, 450, 225).unwrap(), [0]);
        assert_eq!(window_starts(900, 450, 225).unwrap(), [0, 225, 450]);
        assert_eq!(window_starts(1000, 450, 225).unwrap(), [0, 225, 450, 550]);
        assert_eq!(window_starts(451, 450, 225).unwrap(), [0, 1]);
        assert_eq!(window_starts(0, 450, 225).unwrap(), [0]);
        assert!(window_starts(10, 0, 1).is_err());
        assert!(window_starts(10, 4, 5).is_err());
        assert!(window_starts(10, 4, 0).is_err());
    }

    #[test]
    fn layout_budget() {
        let l = layout_sequence(0..450, 10, &SequenceLimits::default()).unwrap();
        assert_eq!(l.len(), 512);
        assert_eq!(l.padding(), 50);
        assert_eq!(l.slots()[0], Slot::SequenceStart);
        assert_eq!(l.slots()[11], Slot::Separator);
        assert_eq!(l.token_at(12), Some(0));
        for t in 0..450 {
            assert_eq!(l.token_at(l.slot_of(t).unwrap()), Some(t));
        }
        assert_eq!(l.slot_of(450), None);
    }

    #[test]
    fn layout_errors() {
        let lim = SequenceLimits::default();
        assert!(layout_sequence(0..0, 5, &lim).is_err());
        assert!(layout_sequence(5..6, 5, &lim).is_ok());
        assert!(layout_sequence(0..451, 5, &lim).is_err());
        assert!(layout_sequence(0..10, 63, &lim).is_err());
        assert!(layout_sequence(0..450, 61, &lim).is_err());
    }

    fn doc_fixture(n: usize) -> (String, Vec<Token>) {
        let text: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
        let text = text.join(" ");
        let toks = tokenize(&text);
        (text, toks)
    }

    #[test]
    fn single_shingle_span() {
        let (text, toks) = doc_fixture(20);
        let shingles = make_shingles("d", &toks, 450, 225).unwrap();
        let lim = SequenceLimits::default();
        let q = 3;
        let layout = layout_sequence(shingles[0].window(), q, &lim).unwrap();
        let pred = ShinglePrediction {
            doc_id: "d".into(),
            shingle_index: 0,
            start_scores: one_hot(512, layout.slot_of(5).unwrap()),
            end_scores: one_hot(512, layout.slot_of(7).unwrap()),
        };
        let a = aggregate_predictions(&[pred], &shingles, q, &lim, &toks, &text).unwrap();
        assert_eq!((a.start_token, a.end_token), (Some(5), Some(7)));
        assert_eq!(a.span_text.as_deref(), Some("w5 w6 w7"));
        assert!(!a.is_impossible);
    }

    #[test]
    fn best_shingle_and_tie_break() {
        let (text, toks) = doc_fixture(600);
        let shingles = make_shingles("d", &toks, 450, 225).unwrap();
        assert_eq!(shingles.len(), 2);
        let lim = SequenceLimits::default();
        let mk = |idx: usize, s: f64, e: f64, slot: usize| {
            let spread = |peak: f64| {
                let mut v = vec![(1.0 - peak) / 511.0; 512];
                v[slot] = peak;
                v
            };
            ShinglePrediction {
                doc_id: "d".into(),
                shingle_index: idx,
                start_scores: spread(s),
                end_scores: spread(e),
            }
        };
        let preds = [mk(0, 0.6, 0.6, 20), mk(1, 0.9, 0.8, 30)];
        let a = aggregate_predictions(&preds, &shingles, 0, &lim, &toks, &text).unwrap();
        assert_eq!(a.shingle_index, 1);
        // slot 30 in shingle 1 = window_start 150 + (30 - 2)
        assert_eq!(a.start_token, Some(178));

        let tied = [mk(1, 0.7, 0.7, 30), mk(0, 0.7, 0.7, 20)];
        let a = aggregate_predictions(&tied, &shingles, 0, &lim, &toks, &text).unwrap();
        assert_eq!(a.shingle_index, 0);
    }

    #[test]
    fn impossible_answer() {
        let (text, toks) = doc_fixture(10);
        let shingles = make_shingles("d", &toks, 450, 225).unwrap();
        let pred = ConstantScorer::default().score(&shingles[0], 512);
        let a = aggregate_predictions(&[pred], &shingles, 4, &SequenceLimits::default(), &toks, &text)
            .unwrap();
        assert!(a.is_impossible);
        assert_eq!(a.span_text, None);
    }

    #[test]
    fn non_context_or_inverted_argmax_is_impossible() {
        let (text, toks) = doc_fixture(10);
        let shingles = make_shingles("d", &toks, 450, 225).unwrap();
        let lim = SequenceLimits::default();
        for (s, e) in [(2, 8), (8, 6), (500, 500)] {
            let pred = ConstantScorer { start_slot: s, end_slot: e, peak: 0.5 }.score(&shingles[0], 512);
            let a = aggregate_predictions(&[pred], &shingles, 4, &lim, &toks, &text).unwrap();
            assert!(a.is_impossible, "{s} {e}");
        }
    }

    #[test]
    fn aggregation_errors() {
        let (text, toks) = doc_fixture(10);
        let shingles = make_shingles("d", &toks, 450, 225).unwrap();
        let lim = SequenceLimits::default();
        let none: [ShinglePrediction; 0] = [];
        assert!(aggregate_predictions(&none, &shingles, 0, &lim, &toks, &text).is_err());
        let mut p = ConstantScorer::default().score(&shingles[0], 512);
        p.shingle_index = 3;
        assert!(aggregate_predictions(&[p], &shingles, 0, &lim, &toks, &text).is_err());
        let mut p = ConstantScorer::default().score(&shingles[0], 512);
        p.start_scores.pop();
        assert!(aggregate_predictions(&[p], &shingles, 0, &lim, &toks, &text).is_err());
    }

    #[test]
    fn works_over_f32() {
        let (text, toks) = doc_fixture(10);
        let shingles = make_shingles("d", &toks, 450, 225).unwrap();
        let p32 = ShinglePrediction::<f32> {
            doc_id: "d".into(),
            shingle_index: 0,
            start_scores: one_hot(512, 3).into_iter().map(|x| x as f32).collect(),
            end_scores: one_hot(512, 4).into_iter().map(|x| x as f32).collect(),
        };
        let a = aggregate_predictions(&[p32], &shingles, 0, &SequenceLimits::default(), &toks, &text)
            .unwrap();
        assert_eq!(a.span_text.as_deref(), Some("w1 w2"));
    }
}
