//! Run configuration. Every field has a default, so a JSON config file only
//! needs the keys it overrides.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heuristic::{HeuristicExtractor, ModifierLexicon, DEFAULT_KEYWORDS, DEFAULT_MODIFIERS};
use crate::kernel::ToyConfig;
use crate::quantity::{
    BucketTable, NumberFinder, Segmenter, VagueTable, DEFAULT_ABBREVIATIONS, DEFAULT_YEAR_CONTEXT,
};
use crate::shingle::{SequenceLimits, DEFAULT_QUESTION_BUDGET, DEFAULT_SEQ_LEN, DEFAULT_STRIDE, DEFAULT_WIDTH};

/// The sequence-start and separator slots.
pub const SPECIAL_SLOTS: usize = 2;

fn strings(words: &[&str]) -> Vec<String> {
    words.iter().map(|w| w.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub buckets: BucketTable,
    pub vague: VagueTable,
    pub keywords: Vec<String>,
    pub modifiers: Vec<String>,
    pub abbreviations: Vec<String>,
    pub year_context: Vec<String>,
    pub shingle_width: usize,
    pub shingle_stride: usize,
    pub seq_len: usize,
    /// Slots reserved for the question, including the two special slots.
    pub question_budget: usize,
    pub question: String,
    pub lambda: f64,
    pub lr: f64,
    pub steps: usize,
    pub seed: u64,
    pub toy_docs: usize,
    pub toy_seq_len: usize,
    pub toy_hidden: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            buckets: BucketTable::default(),
            vague: VagueTable::default(),
            keywords: strings(DEFAULT_KEYWORDS),
            modifiers: strings(DEFAULT_MODIFIERS),
            abbreviations: strings(DEFAULT_ABBREVIATIONS),
            year_context: strings(DEFAULT_YEAR_CONTEXT),
            shingle_width: DEFAULT_WIDTH,
            shingle_stride: DEFAULT_STRIDE,
            seq_len: DEFAULT_SEQ_LEN,
            question_budget: DEFAULT_QUESTION_BUDGET,
            question: "How many people protested?".to_string(),
            lambda: 0.01,
            lr: 0.05,
            steps: 500,
            seed: 0,
            toy_docs: 40,
            toy_seq_len: 32,
            toy_hidden: 8,
        }
    }
}

impl Config {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Config = serde_json::from_str(s).map_err(|e| Error::config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&s)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, list) in [
            ("keywords", &self.keywords),
            ("modifiers", &self.modifiers),
            ("abbreviations", &self.abbreviations),
        ] {
            if list.is_empty() || list.iter().any(|w| w.trim().is_empty()) {
                return Err(Error::config(format!("{name} must be a nonempty list of nonempty strings")));
            }
        }
        BucketTable::new(*self.buckets.lower_bounds())?;
        let (w, s, n) = (self.shingle_width, self.shingle_stride, self.seq_len);
        if w == 0 || s == 0 || s > w {
            return Err(Error::config(format!("invalid shingle geometry: width {w}, stride {s}")));
        }
        if self.question_budget <= SPECIAL_SLOTS {
            return Err(Error::config("question budget must leave room for question tokens"));
        }
        if w + self.question_budget > n {
            return Err(Error::config(format!(
                "width {w} plus question budget {} exceeds sequence length {n}",
                self.question_budget
            )));
        }
        let q = crate::quantity::tokenize(&self.question).len();
        if q == 0 || q > self.question_budget - SPECIAL_SLOTS {
            return Err(Error::config(format!("question has {q} tokens; budget allows {}", self.question_budget - SPECIAL_SLOTS)));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) || !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::config("lambda must be nonnegative and lr positive"));
        }
        self.toy().validate()
    }

    pub fn limits(&self) -> SequenceLimits {
        SequenceLimits {
            seq_len: self.seq_len,
            max_context: self.shingle_width,
            max_question: self.question_budget - SPECIAL_SLOTS,
        }
    }

    pub fn question_len(&self) -> usize {
        crate::quantity::tokenize(&self.question).len()
    }

    pub fn extractor(&self) -> Result<HeuristicExtractor> {
        Ok(HeuristicExtractor {
            keywords: self.keywords.iter().map(|k| k.to_lowercase()).collect(),
            modifiers: ModifierLexicon::new(&self.modifiers),
            buckets: self.buckets.clone(),
            numbers: self.number_finder(),
            segmenter: Segmenter::new(self.abbreviations.iter().cloned()),
        })
    }

    pub fn number_finder(&self) -> NumberFinder {
        NumberFinder {
            vague: self.vague.clone(),
            year_context: self.year_context.iter().map(|w| w.to_lowercase()).collect(),
        }
    }

    pub fn toy(&self) -> ToyConfig {
        ToyConfig {
            docs: self.toy_docs,
            seq_len: self.toy_seq_len,
            hidden: self.toy_hidden,
            steps: self.steps,
            lr: self.lr,
            lambda: self.lambda,
            seed: self.seed,
            ..ToyConfig::default()
        }
    }
}
