//! Rule-based crowd-size extractor.
//!
//! Pipeline: tokenize, split sentences, find number phrases, keep those whose
//! magnitude bucket equals the document's coarse label, prefer the first one
//! inside a sentence containing a crowd keyword, then widen it leftward over
//! hedge modifiers ("about", "more than", ...).

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::quantity::{
    tokenize, BucketTable, MagnitudeLabel, NumberFinder, NumberPhrase, Segmenter, Sentence, Token,
};

pub const DEFAULT_KEYWORDS: &[&str] = &[
    "protesters",
    "demonstrators",
    "gathered",
    "crowd",
    "rallied",
    "attended",
    "picketed",
    "protest",
];

/// Hedge patterns absorbed to the left of a number phrase.
pub const DEFAULT_MODIFIERS: &[&str] = &[
    "as many as",
    "more than",
    "at least",
    "up to",
    "an estimated",
    "about",
    "around",
    "approximately",
    "nearly",
    "roughly",
    "over",
    "some",
    "almost",
    "estimated",
];

/// Keeps exactly the phrases whose bucket equals `coarse`, in order.
pub fn filter_by_magnitude(
    phrases: &[NumberPhrase],
    coarse: MagnitudeLabel,
    buckets: &BucketTable,
) -> Vec<NumberPhrase> {
    phrases
        .iter()
        .filter(|p| buckets.bucket(p.value).is_ok_and(|l| l == coarse))
        .cloned()
        .collect()
}

fn token_has_keyword(token: &str, keywords: &[String]) -> bool {
    let lower = token.to_lowercase();
    keywords.iter().any(|k| lower.starts_with(k.as_str()))
}

/// Indices of sentences containing at least one keyword. Matching is a
/// case-insensitive prefix test, so "protest" also hits "protesting".
pub fn keyword_sentence_indices(
    sentences: &[Sentence],
    tokens: &[Token],
    keywords: &[String],
) -> Vec<usize> {
    sentences
        .iter()
        .enumerate()
        .filter(|(_, s)| tokens[s.range()].iter().any(|t| token_has_keyword(&t.text, keywords)))
        .map(|(i, _)| i)
        .collect()
}

/// Multiword hedge patterns, stored lowercased and longest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModifierLexicon {
    patterns: Vec<Vec<String>>,
}

impl Default for ModifierLexicon {
    fn default() -> Self {
        Self::new(DEFAULT_MODIFIERS.iter().copied())
    }
}

impl ModifierLexicon {
    pub fn new<I, S>(patterns: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut patterns: Vec<Vec<String>> = patterns
            .into_iter()
            .map(|p| p.as_ref().split_whitespace().map(str::to_lowercase).collect::<Vec<_>>())
            .filter(|p| !p.is_empty())
            .collect();
        patterns.sort_by(|a, b| b.len().cmp(&a.len()));
        ModifierLexicon { patterns }
    }

    pub fn patterns(&self) -> &[Vec<String>] {
        &self.patterns
    }

    /// Extends `phrase` leftward over adjacent hedge patterns without leaving
    /// `sentence`. Never moves the right edge.
    pub fn expand(&self, phrase: &NumberPhrase, sentence: &Sentence, tokens: &[Token]) -> Range<usize> {
        let mut start = phrase.start;
        'grow: loop {
            for pat in &self.patterns {
                let n = pat.len();
                if start < sentence.start + n {
                    continue;
                }
                let window = &tokens[start - n..start];
                if window.iter().zip(pat).all(|(t, p)| t.text.to_lowercase() == *p) {
                    start -= n;
                    continue 'grow;
                }
            }
            break;
        }
        start..phrase.end
    }
}

/// [`ModifierLexicon::expand`] with the default lexicon.
pub fn expand_modifiers(phrase: &NumberPhrase, sentence: &Sentence, tokens: &[Token]) -> Range<usize> {
    ModifierLexicon::default().expand(phrase, sentence, tokens)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub phrase: NumberPhrase,
    pub sentence_index: usize,
    pub in_keyword_sentence: bool,
    pub tokens: Range<usize>,
    pub chars: Range<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoneReason {
    NoNumberPhrase,
    NoMagnitudeMatch,
    /// Informational: a span was returned from outside any keyword sentence.
    NoKeywordSentenceFallbackUsed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractedSpan {
    pub text: String,
    pub start_char: usize,
    pub end_char: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub span: Option<ExtractedSpan>,
    pub none_reason: Option<NoneReason>,
}

impl ExtractionResult {
    fn none(reason: NoneReason) -> Self {
        ExtractionResult {
            span: None,
            none_reason: Some(reason),
        }
    }

    pub fn fallback_used(&self) -> bool {
        self.none_reason == Some(NoneReason::NoKeywordSentenceFallbackUsed)
    }
}

#[derive(Debug, Clone)]
pub struct HeuristicExtractor {
    pub keywords: Vec<String>,
    pub modifiers: ModifierLexicon,
    pub buckets: BucketTable,
    pub numbers: NumberFinder,
    pub segmenter: Segmenter,
}

impl Default for HeuristicExtractor {
    fn default() -> Self {
        HeuristicExtractor {
            keywords: DEFAULT_KEYWORDS.iter().map(|s| s.to_string()).collect(),
            modifiers: ModifierLexicon::default(),
            buckets: BucketTable::default(),
            numbers: NumberFinder::default(),
            segmenter: Segmenter::default(),
        }
    }
}

struct Analysis {
    tokens: Vec<Token>,
    sentences: Vec<Sentence>,
    phrases: Vec<NumberPhrase>,
}

impl HeuristicExtractor {
    fn analyse(&self, text: &str) -> Analysis {
        let tokens = tokenize(text);
        let sentences = self.segmenter.segment(&tokens);
        let phrases = self.numbers.find(&tokens, text);
        Analysis {
            tokens,
            sentences,
            phrases,
        }
    }

    /// All magnitude-matching phrases as expanded candidates, in text order.
    pub fn candidates(&self, text: &str, coarse: MagnitudeLabel) -> Vec<Candidate> {
        let a = self.analyse(text);
        self.candidates_from(&a, coarse)
    }

    fn candidates_from(&self, a: &Analysis, coarse: MagnitudeLabel) -> Vec<Candidate> {
        let keyword_sentences = keyword_sentence_indices(&a.sentences, &a.tokens, &self.keywords);
        filter_by_magnitude(&a.phrases, coarse, &self.buckets)
            .into_iter()
            .map(|phrase| {
                let sentence_index = a
                    .sentences
                    .iter()
                    .position(|s| s.contains(phrase.start))
                    .expect("sentences tile the token sequence");
                let sentence = &a.sentences[sentence_index];
                let tokens = self.modifiers.expand(&phrase, sentence, &a.tokens);
                let chars = a.tokens[tokens.start].start_char..a.tokens[tokens.end - 1].end_char;
                Candidate {
                    in_keyword_sentence: keyword_sentences.binary_search(&sentence_index).is_ok(),
                    phrase,
                    sentence_index,
                    tokens,
                    chars,
                }
            })
            .collect()
    }

    pub fn extract(&self, text: &str, coarse: MagnitudeLabel) -> ExtractionResult {
        let a = self.analyse(text);
        if a.phrases.is_empty() {
            return ExtractionResult::none(NoneReason::NoNumberPhrase);
        }
        let candidates = self.candidates_from(&a, coarse);
        let (chosen, fallback) = match candidates.iter().find(|c| c.in_keyword_sentence) {
            Some(c) => (c, false),
            None => match candidates.first() {
                Some(c) => (c, true),
                None => return ExtractionResult::none(NoneReason::NoMagnitudeMatch),
            },
        };
        let bytes = a.tokens[chosen.tokens.start].bytes.start..a.tokens[chosen.tokens.end - 1].bytes.end;
        ExtractionResult {
            span: Some(ExtractedSpan {
                text: text[bytes].to_string(),
                start_char: chosen.chars.start,
                end_char: chosen.chars.end,
            }),
            none_reason: fallback.then_some(NoneReason::NoKeywordSentenceFallbackUsed),
        }
    }

    pub fn extract_document(&self, doc: &Document, coarse: MagnitudeLabel) -> ExtractionResult {
        self.extract(&doc.text, coarse)
    }
}

/// [`HeuristicExtractor::extract`] with default tables.
pub fn extract(text: &str, coarse: MagnitudeLabel) -> ExtractionResult {
    HeuristicExtractor::default().extract(text, coarse)
}
