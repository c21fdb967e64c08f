//! Exact match and token-level F1 over predicted spans.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, GoldSpan};
use crate::error::{Error, Result};

/// A predicted span for one document; no text means "no answer".
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Prediction {
    #[serde(alias = "doc_id")]
    pub id: String,
    #[serde(default)]
    pub span_text: Option<String>,
    #[serde(default)]
    pub start_char: Option<usize>,
    #[serde(default)]
    pub end_char: Option<usize>,
}

impl Prediction {
    pub fn new(id: impl Into<String>, span_text: Option<&str>) -> Self {
        Prediction {
            id: id.into(),
            span_text: span_text.map(str::to_string),
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let ranged = self.start_char.is_some() && self.end_char.is_some();
        let unranged = self.start_char.is_none() && self.end_char.is_none();
        match (&self.span_text, ranged, unranged) {
            (Some(_), true, _) | (None, _, true) => Ok(()),
            // Text without offsets is tolerated for hand-written predictions.
            (Some(_), false, true) => Ok(()),
            _ => Err(Error::validation(format!(
                "prediction {}: span text and char range must be present together",
                self.id
            ))),
        }
    }
}

/// Lowercases, splits on whitespace and trims punctuation off each token.
/// Articles and hedge words are kept.
pub fn normalize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

fn counts(tokens: &[String]) -> HashMap<&str, usize> {
    let mut m = HashMap::new();
    for t in tokens {
        *m.entry(t.as_str()).or_insert(0) += 1;
    }
    m
}

fn pair_f1(pred: &[String], gold: &[String]) -> f64 {
    if pred.is_empty() || gold.is_empty() {
        return if pred.is_empty() && gold.is_empty() { 1.0 } else { 0.0 };
    }
    let g = counts(gold);
    let common: usize = counts(pred)
        .iter()
        .map(|(t, n)| (*n).min(g.get(t).copied().unwrap_or(0)))
        .sum();
    // Harmonic mean of P = c/|pred| and R = c/|gold|, in the exact form.
    2.0 * common as f64 / (pred.len() + gold.len()) as f64
}

fn gold_token_lists(golds: &[GoldSpan]) -> Vec<Vec<String>> {
    if golds.is_empty() {
        vec![Vec::new()]
    } else {
        golds.iter().map(|g| normalize(&g.text)).collect()
    }
}

/// Normalized token sequences equal for some gold. An absent prediction
/// matches an empty gold list.
pub fn exact_match(pred: Option<&str>, golds: &[GoldSpan]) -> bool {
    let p = pred.map(normalize).unwrap_or_default();
    gold_token_lists(golds).iter().any(|g| *g == p)
}

/// Multiset token F1, maximized over golds.
pub fn token_f1(pred: Option<&str>, golds: &[GoldSpan]) -> f64 {
    let p = pred.map(normalize).unwrap_or_default();
    gold_token_lists(golds)
        .iter()
        .map(|g| pair_f1(&p, g))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocScore {
    pub id: String,
    pub em: bool,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub exact_match: f64,
    pub f1: f64,
    pub n_docs: usize,
    pub per_doc: Vec<DocScore>,
}

/// Scores every corpus document; a document without a prediction counts as
/// predicted-impossible.
pub fn evaluate(predictions: &[Prediction], corpus: &[Document]) -> Result<EvalReport> {
    let known: HashSet<&str> = corpus.iter().map(|d| d.id.as_str()).collect();
    let mut by_id: HashMap<&str, &Prediction> = HashMap::with_capacity(predictions.len());
    for p in predictions {
        p.validate()?;
        if !known.contains(p.id.as_str()) {
            return Err(Error::validation(format!("prediction for unknown document {}", p.id)));
        }
        if by_id.insert(p.id.as_str(), p).is_some() {
            return Err(Error::validation(format!("more than one prediction for {}", p.id)));
        }
    }

    let per_doc: Vec<DocScore> = corpus
        .iter()
        .map(|d| {
            let pred = by_id.get(d.id.as_str()).and_then(|p| p.span_text.as_deref());
            DocScore {
                id: d.id.clone(),
                em: exact_match(pred, d.golds()),
                f1: token_f1(pred, d.golds()),
            }
        })
        .collect();

    let n = per_doc.len();
    let mean = |f: &dyn Fn(&DocScore) -> f64| {
        if n == 0 {
            0.0
        } else {
            per_doc.iter().map(f).sum::<f64>() / n as f64
        }
    };
    Ok(EvalReport {
        exact_match: mean(&|s| if s.em { 1.0 } else { 0.0 }),
        f1: mean(&|s| s.f1),
        n_docs: n,
        per_doc,
    })
}
