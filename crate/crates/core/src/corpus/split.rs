use std::fs;
use std::path::Path;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{char_slice, save_corpus, Document, GoldSpan};
use crate::error::{Error, Result};

pub const SPLIT_NAMES: [&str; 4] = ["coarse_train", "gold_span_train", "validation", "test"];

pub const DEFAULT_GOLD_SPAN_COUNT: usize = 25;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Allocation {
    /// Exact fractions summing to one; converted by largest remainder.
    Ratios([Ratio<u64>; 4]),
    Counts([usize; 4]),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSpec {
    pub allocation: Allocation,
    pub seed: u64,
    /// Cut gold-span-train documents down to the paragraph holding their
    /// first gold span.
    pub truncate_gold_paragraphs: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SplitResult {
    pub coarse_train: Vec<String>,
    pub gold_span_train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
}

impl SplitResult {
    pub fn parts(&self) -> [&[String]; 4] {
        [&self.coarse_train, &self.gold_span_train, &self.validation, &self.test]
    }

    pub fn counts(&self) -> [usize; 4] {
        self.parts().map(<[String]>::len)
    }
}

/// Parses "0.7", "7/10" or "1" into an exact fraction.
pub fn parse_ratio(s: &str) -> Result<Ratio<u64>> {
    let s = s.trim();
    let bad = || Error::config(format!("not a nonnegative ratio: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: u64 = n.trim().parse().map_err(|_| bad())?;
        let d: u64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(n, d));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    if !digits.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 18 {
        return Err(bad());
    }
    let num: u64 = digits.parse().map_err(|_| bad())?;
    Ok(Ratio::new(num, 10u64.pow(frac.len() as u32)))
}

/// Largest-remainder apportionment of `total` items. Ties in the fractional
/// remainder go to the earlier part.
pub fn apportion(ratios: &[Ratio<u64>; 4], total: usize) -> Result<[usize; 4]> {
    let sum = ratios.iter().fold(Ratio::zero(), |acc, r| acc + r);
    if sum != Ratio::from_integer(1) {
        return Err(Error::config(format!("split ratios sum to {sum}, not 1")));
    }
    let quotas = ratios.map(|r| r * Ratio::from_integer(total as u64));
    let mut counts = quotas.map(|q| q.to_integer().to_usize().unwrap_or(usize::MAX));
    let mut left = total - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| quotas[b].fract().cmp(&quotas[a].fract()).then(a.cmp(&b)));
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    Ok(counts)
}

/// Seeded shuffle, then consecutive slices in the order coarse_train,
/// gold_span_train, validation, test.
pub fn split_corpus(corpus: &[Document], spec: &SplitSpec) -> Result<SplitResult> {
    if corpus.is_empty() {
        return Err(Error::Empty("corpus"));
    }
    let counts = match &spec.allocation {
        Allocation::Counts(c) => {
            let sum: usize = c.iter().sum();
            if sum != corpus.len() {
                return Err(Error::config(format!(
                    "split counts total {sum} but the corpus has {} documents",
                    corpus.len()
                )));
            }
            *c
        }
        Allocation::Ratios(r) => apportion(r, corpus.len())?,
    };

    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));

    let mut ids = order.into_iter().map(|i| corpus[i].id.clone());
    let mut take = |n: usize| ids.by_ref().take(n).collect::<Vec<_>>();
    Ok(SplitResult {
        coarse_train: take(counts[0]),
        gold_span_train: take(counts[1]),
        validation: take(counts[2]),
        test: take(counts[3]),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitFiles {
    pub coarse_train: Vec<Document>,
    pub gold_span_train: Vec<Document>,
    pub validation: Vec<Document>,
    pub test: Vec<Document>,
}

/// Line containing the first gold span's start through the line containing
/// its end, in char offsets.
fn paragraph_bounds(text: &str, span: &GoldSpan) -> (usize, usize) {
    let chars: Vec<char> = text.chars().collect();
    let mut start = span.start_char.min(chars.len());
    while start > 0 && chars[start - 1] != '\n' {
        start -= 1;
    }
    let mut end = span.end_char.min(chars.len());
    while end < chars.len() && chars[end] != '\n' {
        end += 1;
    }
    while start < span.start_char && chars[start].is_whitespace() {
        start += 1;
    }
    while end > span.end_char && chars[end - 1].is_whitespace() {
        end -= 1;
    }
    (start, end)
}

fn truncate_to_paragraph(doc: &Document) -> Document {
    let Some(first) = doc.golds().first() else {
        return doc.clone();
    };
    let (from, to) = paragraph_bounds(&doc.text, first);
    let text = char_slice(&doc.text, from, to).unwrap_or_default().to_string();
    let spans = doc
        .golds()
        .iter()
        .filter(|g| g.start_char >= from && g.end_char <= to)
        .map(|g| GoldSpan {
            text: g.text.clone(),
            start_char: g.start_char - from,
            end_char: g.end_char - from,
        })
        .collect();
    Document {
        text,
        gold_spans: Some(spans),
        ..doc.clone()
    }
}

/// Builds the four emitted corpora: coarse-train loses its gold spans,
/// gold-span-train loses its coarse labels (and is optionally truncated).
pub fn materialize_split(
    corpus: &[Document],
    result: &SplitResult,
    truncate_gold_paragraphs: bool,
) -> Result<SplitFiles> {
    let by_id: std::collections::HashMap<&str, &Document> =
        corpus.iter().map(|d| (d.id.as_str(), d)).collect();
    let lookup = |id: &String| {
        by_id
            .get(id.as_str())
            .map(|d| (*d).clone())
            .ok_or_else(|| Error::validation(format!("split references unknown id {id}")))
    };
    let collect = |ids: &[String]| ids.iter().map(lookup).collect::<Result<Vec<_>>>();

    let coarse_train = collect(&result.coarse_train)?
        .into_iter()
        .map(|d| Document {
            gold_spans: None,
            ..d
        })
        .collect();
    let gold_span_train = collect(&result.gold_span_train)?
        .into_iter()
        .map(|d| {
            let d = Document {
                coarse_label: None,
                ..d
            };
            if truncate_gold_paragraphs {
                truncate_to_paragraph(&d)
            } else {
                d
            }
        })
        .collect();
    Ok(SplitFiles {
        coarse_train,
        gold_span_train,
        validation: collect(&result.validation)?,
        test: collect(&result.test)?,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub counts: std::collections::BTreeMap<String, usize>,
    pub files: std::collections::BTreeMap<String, String>,
}

/// Writes `<name>.jsonl` for each split plus `manifest.json` into `dir`.
pub fn write_split(dir: impl AsRef<Path>, files: &SplitFiles, seed: u64) -> Result<SplitManifest> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let parts = [&files.coarse_train, &files.gold_span_train, &files.validation, &files.test];
    let mut manifest = SplitManifest {
        seed,
        counts: Default::default(),
        files: Default::default(),
    };
    for (name, docs) in SPLIT_NAMES.iter().zip(parts) {
        let file = format!("{name}.jsonl");
        save_corpus(dir.join(&file), docs)?;
        manifest.counts.insert(name.to_string(), docs.len());
        manifest.files.insert(name.to_string(), file);
    }
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    fs::write(dir.join("manifest.json"), json)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(n: usize) -> Vec<Document> {
        (0..n).map(|i| Document::new(format!("doc{i}"), "text")).collect()
    }

    fn r(s: &str) -> Ratio<u64> {
        parse_ratio(s).unwrap()
    }

    #[test]
    fn ratio_parsing() {
        assert_eq!(r("0.7"), Ratio::new(7, 10));
        assert_eq!(r("7/10"), Ratio::new(7, 10));
        assert_eq!(r("1"), Ratio::from_integer(1));
        assert_eq!(r(".25"), Ratio::new(1, 4));
        for bad in ["", ".", "-0.1", "1/0", "a", "0.1.2"] {
            assert!(parse_ratio(bad).is_err(), "{bad}");
        }
    }

    /// Brute-force reference: hand every unit to the part with the largest
    /// outstanding (quota - assigned), earliest part on ties, starting from
    /// the floors.
    fn apportion_oracle(ratios: [f64; 4], total: usize) -> [usize; 4] {
        let quotas = ratios.map(|q| q * total as f64);
        let mut counts = quotas.map(|q| (q + 1e-9).floor() as usize);
        while counts.iter().sum::<usize>() < total {
            let mut best = 0;
            for i in 1..4 {
                let gap = |k: usize| quotas[k] - counts[k] as f64;
                if gap(i) > gap(best) + 1e-9 {
                    best = i;
                }
            }
            counts[best] += 1;
        }
        counts
    }

    #[test]
    fn largest_remainder() {
        let ratios = ["0.7", "0.1", "0.1", "0.1"].map(r);
        assert_eq!(apportion(&ratios, 10).unwrap(), [7, 1, 1, 1]);
        assert_eq!(apportion_oracle([0.7, 0.1, 0.1, 0.1], 10), [7, 1, 1, 1]);

        let thirds = ["1/3", "1/3", "1/3", "0"].map(r);
        assert_eq!(apportion(&thirds, 10).unwrap(), [4, 3, 3, 0]);
        for total in 1..60 {
            let got = apportion(&["0.5", "0.2", "0.2", "0.1"].map(r), total).unwrap();
            assert_eq!(got, apportion_oracle([0.5, 0.2, 0.2, 0.1], total), "{total}");
            assert_eq!(got.iter().sum::<usize>(), total);
        }
        assert!(apportion(&["0.5", "0.2", "0.2", "0.2"].map(r), 10).is_err());
    }

    #[test]
    fn paper_sized_split() {
        let docs = corpus(3849);
        let spec = SplitSpec {
            allocation: Allocation::Counts([2694, 25, 200, 930]),
            seed: 7,
            truncate_gold_paragraphs: true,
        };
        let a = split_corpus(&docs, &spec).unwrap();
        assert_eq!(a.counts(), [2694, 25, 200, 930]);
        assert_eq!(a, split_corpus(&docs, &spec).unwrap());
        let other = split_corpus(&docs, &SplitSpec { seed: 8, ..spec }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn oversubscribed_counts() {
        let spec = SplitSpec {
            allocation: Allocation::Counts([5, 5, 0, 1]),
            seed: 1,
            truncate_gold_paragraphs: false,
        };
        assert!(split_corpus(&corpus(10), &spec).is_err());
        assert!(split_corpus(&[], &spec).is_err());
    }

    #[test]
    fn materialized_files_strip_fields() {
        let text = "Intro line.\n  About 300 people gathered.  \nClosing line.";
        let mut d = Document::new("g", text);
        d.coarse_label = Some(crate::quantity::MagnitudeLabel::new(1).unwrap());
        d.gold_spans = Some(vec![GoldSpan {
            text: "About 300".into(),
            start_char: 14,
            end_char: 23,
        }]);
        d.validate().unwrap();
        let result = SplitResult {
            gold_span_train: vec!["g".into()],
            ..Default::default()
        };
        let files = materialize_split(&[d.clone()], &result, true).unwrap();
        let g = &files.gold_span_train[0];
        assert_eq!(g.text, "About 300 people gathered.");
        assert_eq!(g.coarse_label, None);
        assert_eq!(g.golds()[0].start_char, 0);
        g.validate().unwrap();

        let untouched = materialize_split(&[d.clone()], &result, false).unwrap();
        assert_eq!(untouched.gold_span_train[0].text, text);

        let result = SplitResult {
            coarse_train: vec!["g".into()],
            ..Default::default()
        };
        let files = materialize_split(&[d], &result, true).unwrap();
        assert_eq!(files.coarse_train[0].gold_spans, None);
        assert!(files.coarse_train[0].coarse_label.is_some());
    }
}
