use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::Token;

/// A half-open range of token indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub start: usize,
    pub end: usize,
}

impl Sentence {
    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }

    pub fn contains(&self, token: usize) -> bool {
        self.range().contains(&token)
    }
}

pub const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "Mr", "Mrs", "Ms", "Dr", "St", "Jr", "Sr", "Prof", "Gen", "Gov", "Sen", "Rep", "Lt", "Col",
    "Sgt", "Capt", "Rev", "Hon", "Mt", "Ave", "Blvd", "Rd", "Inc", "Ltd", "Co", "Corp", "vs", "No",
    "U.S", "U.K", "D.C", "Jan", "Feb", "Mar", "Apr", "Aug", "Sept", "Sep", "Oct", "Nov", "Dec",
];

const CLOSERS: &[&str] = &["\"", "'", "”", "’", ")", "]"];

/// Rule-based sentence splitter with an abbreviation guard.
#[derive(Debug, Clone)]
pub struct Segmenter {
    abbreviations: Vec<String>,
}

impl Default for Segmenter {
    fn default() -> Self {
        Self::new(DEFAULT_ABBREVIATIONS.iter().copied())
    }
}

impl Segmenter {
    pub fn new<I, S>(abbreviations: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Segmenter {
            abbreviations: abbreviations.into_iter().map(Into::into).collect(),
        }
    }

    fn is_abbreviation(&self, token: &str) -> bool {
        let mut chars = token.chars();
        if let (Some(c), None) = (chars.next(), chars.next()) {
            if c.is_uppercase() {
                return true;
            }
        }
        self.abbreviations.iter().any(|a| a == token)
    }

    /// Splits after "." / "!" / "?" (plus any closing quotes or brackets that
    /// follow) unless a "." comes right after a guarded abbreviation.
    pub fn segment(&self, tokens: &[Token]) -> Vec<Sentence> {
        let mut out = Vec::new();
        let mut start = 0;
        let mut i = 0;
        while i < tokens.len() {
            let t = tokens[i].text.as_str();
            let terminal = matches!(t, "." | "!" | "?");
            let guarded = t == "."
                && i > start
                && self.is_abbreviation(&tokens[i - 1].text)
                && tokens[i - 1].end_char == tokens[i].start_char;
            if terminal && !guarded {
                let mut end = i + 1;
                while end < tokens.len()
                    && (matches!(tokens[end].text.as_str(), "." | "!" | "?")
                        || CLOSERS.contains(&tokens[end].text.as_str()))
                {
                    end += 1;
                }
                out.push(Sentence { start, end });
                start = end;
                i = end;
            } else {
                i += 1;
            }
        }
        if start < tokens.len() {
            out.push(Sentence {
                start,
                end: tokens.len(),
            });
        }
        out
    }
}

/// Segments with the default abbreviation list.
pub fn segment_sentences(tokens: &[Token]) -> Vec<Sentence> {
    Segmenter::default().segment(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantity::tokenize;

    fn count(text: &str) -> usize {
        segment_sentences(&tokenize(text)).len()
    }

    #[test]
    fn two_plain_sentences() {
        let toks = tokenize("A march. B rally.");
        let s = segment_sentences(&toks);
        assert_eq!(s, [Sentence { start: 0, end: 3 }, Sentence { start: 3, end: 6 }]);
    }

    #[test]
    fn abbreviation_guard() {
        assert_eq!(count("Dr. Smith spoke."), 1);
        assert_eq!(count("Rallies across the U.S. drew crowds. Then rain."), 2);
        assert_eq!(count("J. Doe led 40 marchers."), 1);
    }

    #[test]
    fn no_terminal_punctuation() {
        let toks = tokenize("crowds gathered downtown");
        assert_eq!(segment_sentences(&toks), [Sentence { start: 0, end: 3 }]);
    }

    #[test]
    fn closing_quote_stays_with_sentence() {
        let toks = tokenize("He said \"go home.\" They stayed.");
        let s = segment_sentences(&toks);
        assert_eq!(s.len(), 2);
        assert_eq!(toks[s[0].end - 1].text, "\"");
    }

    #[test]
    fn empty() {
        assert!(segment_sentences(&[]).is_empty());
    }

    #[test]
    fn sentences_tile_tokens() {
        let toks = tokenize("One! Two? Three... Four. Mr. Five went to St. Paul. end");
        let s = segment_sentences(&toks);
        assert_eq!(s.first().unwrap().start, 0);
        assert_eq!(s.last().unwrap().end, toks.len());
        for w in s.windows(2) {
            assert_eq!(w[0].end, w[1].start);
        }
        assert!(s.iter().all(|x| x.start < x.end));
    }
}
