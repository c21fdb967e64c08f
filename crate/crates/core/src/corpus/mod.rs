//! Documents, JSONL corpora, four-way splits and weak-label emission.

mod html;
mod split;

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heuristic::ExtractionResult;
use crate::quantity::MagnitudeLabel;

pub use html::ingest_html;
pub use split::{
    apportion, materialize_split, parse_ratio, split_corpus, write_split, Allocation, SplitFiles,
    SplitManifest, SplitResult, SplitSpec, DEFAULT_GOLD_SPAN_COUNT, SPLIT_NAMES,
};

/// A character-offset span (end-exclusive, counted in Unicode scalars).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldSpan {
    pub text: String,
    pub start_char: usize,
    pub end_char: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    #[serde(default)]
    pub url: Option<String>,
    pub text: String,
    #[serde(default)]
    pub coarse_label: Option<MagnitudeLabel>,
    #[serde(default)]
    pub gold_spans: Option<Vec<GoldSpan>>,
}

/// Slices `text` by char offsets, `None` when out of range.
pub fn char_slice(text: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let mut indices = text.char_indices().map(|(b, _)| b).chain(std::iter::once(text.len()));
    let from = indices.nth(start)?;
    let to = if end == start {
        from
    } else {
        indices.nth(end - start - 1)?
    };
    Some(&text[from..to])
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            url: None,
            text: text.into(),
            coarse_label: None,
            gold_spans: None,
        }
    }

    pub fn golds(&self) -> &[GoldSpan] {
        self.gold_spans.as_deref().unwrap_or(&[])
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::validation("document with empty id"));
        }
        for g in self.golds() {
            if g.text.is_empty() || g.end_char <= g.start_char {
                return Err(Error::validation(format!(
                    "document {}: empty gold span at {}..{}",
                    self.id, g.start_char, g.end_char
                )));
            }
            match char_slice(&self.text, g.start_char, g.end_char) {
                Some(s) if s == g.text => {}
                Some(s) => {
                    return Err(Error::validation(format!(
                        "document {}: gold span {:?} does not match text slice {:?}",
                        self.id, g.text, s
                    )))
                }
                None => {
                    return Err(Error::validation(format!(
                        "document {}: gold span {}..{} out of bounds",
                        self.id, g.start_char, g.end_char
                    )))
                }
            }
        }
        Ok(())
    }
}

pub fn validate_corpus(docs: &[Document]) -> Result<()> {
    let mut seen = HashSet::with_capacity(docs.len());
    for d in docs {
        d.validate()?;
        if !seen.insert(d.id.as_str()) {
            return Err(Error::validation(format!("duplicate document id {}", d.id)));
        }
    }
    Ok(())
}

/// Reads one JSON object per line; blank lines are skipped.
pub fn read_jsonl<T, R>(reader: R) -> Result<Vec<T>>
where
    T: for<'de> Deserialize<'de>,
    R: Read,
{
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|source| Error::Parse { line: i + 1, source })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize, W: Write>(mut writer: W, records: &[T]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut writer, r)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_corpus<R: Read>(reader: R) -> Result<Vec<Document>> {
    let docs: Vec<Document> = read_jsonl(reader)?;
    validate_corpus(&docs)?;
    Ok(docs)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    read_corpus(File::open(path)?)
}

pub fn save_corpus(path: impl AsRef<Path>, docs: &[Document]) -> Result<()> {
    write_jsonl(BufWriter::new(File::create(path)?), docs)
}

/// Replaces each document's gold spans with the extractor's single span, or
/// with an empty list (an impossible-answer example) when it finds none.
pub fn emit_weak_labels<F>(corpus: &[Document], extract: F) -> Result<Vec<Document>>
where
    F: Fn(&Document, MagnitudeLabel) -> ExtractionResult,
{
    corpus
        .iter()
        .map(|doc| {
            let coarse = doc.coarse_label.ok_or_else(|| {
                Error::validation(format!("document {} has no coarse_label", doc.id))
            })?;
            let spans = extract(doc, coarse)
                .span
                .map(|s| GoldSpan {
                    text: s.text,
                    start_char: s.start_char,
                    end_char: s.end_char,
                })
                .into_iter()
                .collect();
            Ok(Document {
                gold_spans: Some(spans),
                ..doc.clone()
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heuristic::HeuristicExtractor;

    fn doc_with_span(text: &str, span: &str, start: usize) -> Document {
        Document {
            gold_spans: Some(vec![GoldSpan {
                text: span.into(),
                start_char: start,
                end_char: start + span.chars().count(),
            }]),
            ..Document::new("d1", text)
        }
    }

    #[test]
    fn char_slicing() {
        assert_eq!(char_slice("héllo", 1, 3), Some("él"));
        assert_eq!(char_slice("héllo", 0, 5), Some("héllo"));
        assert_eq!(char_slice("héllo", 5, 5), Some(""));
        assert_eq!(char_slice("héllo", 2, 6), None);
        assert_eq!(char_slice("héllo", 3, 2), None);
    }

    #[test]
    fn single_record_round_trip() {
        let d = doc_with_span("About 300 people gathered.", "About 300", 0);
        let mut buf = Vec::new();
        write_jsonl(&mut buf, std::slice::from_ref(&d)).unwrap();
        assert_eq!(read_corpus(&buf[..]).unwrap(), [d]);
    }

    #[test]
    fn span_mismatch_is_rejected() {
        let d = doc_with_span("About 300 people gathered.", "About 30", 1);
        let err = d.validate().unwrap_err().to_string();
        assert!(err.contains("d1"), "{err}");
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let input = "{\"id\":\"a\",\"text\":\"x\"}\n{not json}\n";
        match read_corpus(input.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let input = "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"a\",\"text\":\"y\"}\n";
        assert!(matches!(read_corpus(input.as_bytes()), Err(Error::Validation(_))));
    }

    #[test]
    fn out_of_range_label_rejected() {
        let input = "{\"id\":\"a\",\"text\":\"x\",\"coarse_label\":4}\n";
        assert!(read_corpus(input.as_bytes()).is_err());
    }

    #[test]
    fn weak_labels() {
        let ex = HeuristicExtractor::default();
        let mut a = Document::new("a", "Police said about 200 protesters gathered.");
        a.coarse_label = Some(MagnitudeLabel::new(1).unwrap());
        let mut b = Document::new("b", "No figures were given.");
        b.coarse_label = Some(MagnitudeLabel::new(0).unwrap());
        let out = emit_weak_labels(&[a, b], |d, l| ex.extract_document(d, l)).unwrap();
        assert_eq!(out.len(), 2);
        let g = &out[0].golds()[0];
        assert_eq!(g.text, "about 200");
        assert_eq!(char_slice(&out[0].text, g.start_char, g.end_char), Some("about 200"));
        assert_eq!(out[1].gold_spans, Some(vec![]));
        validate_corpus(&out).unwrap();
    }

    #[test]
    fn weak_labels_need_coarse_label() {
        let ex = HeuristicExtractor::default();
        let d = Document::new("nolabel", "About 20 came.");
        let err = emit_weak_labels(&[d], |d, l| ex.extract_document(d, l)).unwrap_err();
        assert!(err.to_string().contains("nolabel"));
    }
}
