//! Seeded generator of labelled protest reports for end-to-end checks.
//!
//! Each document has one keyword sentence carrying the planted crowd size
//! (optionally hedged, written as digits, comma-grouped digits or words) and
//! 2-4 distractor numbers whose magnitude bucket differs from the label.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Document, GoldSpan};
use crate::quantity::{magnitude_bucket, MagnitudeLabel};

pub const SYNTHETIC_DOCS: usize = 240;
pub const SYNTHETIC_SEED: u64 = 2020;

const PLACES: &[&str] = &[
    "City Hall",
    "the state capitol",
    "Main Street",
    "the county courthouse",
    "Lincoln Park",
    "the federal building",
    "the university library",
    "Union Square",
];

const DAYS: &[&str] = &["Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"];

const CAUSES: &[&str] = &[
    "climate policy",
    "police funding",
    "school closures",
    "rent increases",
    "a pipeline project",
    "voting rights",
    "hospital cuts",
];

const HEDGES: &[&str] = &[
    "about",
    "more than",
    "nearly",
    "an estimated",
    "as many as",
    "roughly",
    "at least",
    "approximately",
    "around",
    "up to",
];

/// Keyword sentences; `{N}` is replaced by the planted span and `{X}`, when
/// present, by a distractor.
const KEYWORD_TEMPLATES: &[&str] = &[
    "After {X} days of talks, {N} protesters gathered at {P}.",
    "Across {X} blocks near {P}, {N} demonstrators marched on {D}.",
    "{N} protesters gathered outside {P} on {D} to oppose {C}.",
    "Police said {N} demonstrators marched from {P} on {D}.",
    "On {D}, {N} people rallied at {P} against {C}.",
    "Organizers said {N} people attended the rally at {P}.",
    "A crowd of {N} filled {P} on {D}.",
    "{N} workers picketed near {P} over {C}.",
];

/// Neutral sentences; `{X}` is replaced by a distractor number.
const DISTRACTOR_TEMPLATES: &[&str] = &[
    "The city employs {X} police officers.",
    "Local officials reported {X} calls to the hotline that week.",
    "The route stretched for {X} meters.",
    "The budget under debate totals {X} dollars.",
    "Transit officials added {X} extra buses.",
    "The petition listed {X} signatures from local businesses.",
];

const FILLER: &[&str] = &[
    "Speakers called for a public hearing.",
    "The event ended peacefully in the early evening.",
    "City officials declined to comment.",
    "Traffic was diverted around downtown.",
    "Organizers plan another event next month.",
    "No arrests were reported.",
];

const UNITS: &[&str] = &[
    "", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven", "twelve",
    "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
];
const TENS: &[&str] = &["", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"];

fn words_below_thousand(v: u64) -> String {
    let mut parts = Vec::new();
    if v >= 100 {
        parts.push(format!("{} hundred", UNITS[(v / 100) as usize]));
    }
    let rest = v % 100;
    if rest >= 20 {
        let t = TENS[(rest / 10) as usize];
        parts.push(if rest % 10 == 0 {
            t.to_string()
        } else {
            format!("{t}-{}", UNITS[(rest % 10) as usize])
        });
    } else if rest > 0 {
        parts.push(UNITS[rest as usize].to_string());
    }
    parts.join(" ")
}

/// English cardinal for `1..1_000_000`.
pub fn number_words(v: u64) -> String {
    assert!((1..1_000_000).contains(&v), "number_words covers 1..1000000");
    let (thousands, rest) = (v / 1000, v % 1000);
    match (thousands, rest) {
        (0, r) => words_below_thousand(r),
        (t, 0) => format!("{} thousand", words_below_thousand(t)),
        (t, r) => format!("{} thousand {}", words_below_thousand(t), words_below_thousand(r)),
    }
}

fn with_commas(v: u64) -> String {
    let s = v.to_string();
    let mut out = String::new();
    for (i, c) in s.chars().enumerate() {
        if i > 0 && (s.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

fn is_year_like(v: u64) -> bool {
    (1900..=2099).contains(&v)
}

fn value_in_bucket<R: Rng>(rng: &mut R, label: u8) -> u64 {
    loop {
        let v = match label {
            0 => rng.random_range(2..100),
            1 => rng.random_range(1..10) * 100 + rng.random_range(0..10) * 10,
            2 => rng.random_range(1000..10_000) / 50 * 50,
            _ => rng.random_range(10..400) * 1000 + rng.random_range(0..4) * 250,
        };
        if !is_year_like(v) && u64::from(magnitude_bucket(v).expect("positive").get()) == u64::from(label) {
            return v;
        }
    }
}

fn render<R: Rng>(rng: &mut R, v: u64) -> String {
    match rng.random_range(0..4) {
        0 if v < 1_000_000 && (v < 100 || v % 100 == 0) => number_words(v),
        1 | 2 if v >= 1000 => with_commas(v),
        _ => v.to_string(),
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn fill(template: &str, rng: &mut ChaCha8Rng) -> String {
    template
        .replace("{P}", PLACES.choose(rng).expect("nonempty"))
        .replace("{D}", DAYS.choose(rng).expect("nonempty"))
        .replace("{C}", CAUSES.choose(rng).expect("nonempty"))
}

/// One document: returns the text and the char offsets of the planted span.
fn document(rng: &mut ChaCha8Rng, label: u8) -> (String, GoldSpan) {
    let value = value_in_bucket(rng, label);
    let number = render(rng, value);
    let planted = if rng.random_bool(0.6) {
        format!("{} {number}", HEDGES.choose(rng).expect("nonempty"))
    } else {
        number
    };

    let others: Vec<u8> = (0..=3).filter(|&l| l != label).collect();
    let distractor = |rng: &mut ChaCha8Rng| {
        let l = *others.choose(rng).expect("three other labels");
        let x = value_in_bucket(rng, l);
        with_commas_or_plain(rng, x)
    };
    let distractors = rng.random_range(2..=4);

    let template = KEYWORD_TEMPLATES.choose(rng).expect("nonempty");
    let inline = template.contains("{X}");
    let mut keyword = fill(template, rng);
    if inline {
        keyword = keyword.replace("{X}", &distractor(rng));
    }
    let at_start = template.starts_with("{N}");
    let shown = if at_start { capitalize(&planted) } else { planted };
    let (before, after) = keyword.split_once("{N}").expect("placeholder");

    let mut sentences: Vec<(String, Option<(String, String, String)>)> = vec![(
        String::new(),
        Some((before.to_string(), shown, after.to_string())),
    )];

    for _ in 0..distractors - usize::from(inline) {
        let t = DISTRACTOR_TEMPLATES.choose(rng).expect("nonempty");
        sentences.push((t.replace("{X}", &distractor(rng)), None));
    }
    for _ in 0..rng.random_range(1..=3) {
        sentences.push((FILLER.choose(rng).expect("nonempty").to_string(), None));
    }
    sentences.shuffle(rng);

    let mut text = String::new();
    let mut gold = None;
    for (plain, planted) in sentences {
        if !text.is_empty() {
            text.push(' ');
        }
        match planted {
            None => text.push_str(&plain),
            Some((before, span, after)) => {
                text.push_str(&before);
                let start = text.chars().count();
                text.push_str(&span);
                gold = Some(GoldSpan {
                    end_char: start + span.chars().count(),
                    text: span,
                    start_char: start,
                });
                text.push_str(&after);
            }
        }
    }
    (text, gold.expect("one planted sentence"))
}

fn with_commas_or_plain<R: Rng>(rng: &mut R, v: u64) -> String {
    if v >= 1000 && rng.random_bool(0.5) {
        with_commas(v)
    } else {
        v.to_string()
    }
}

/// `n` documents with ids `synth-0000`, `synth-0001`, ...; labels cycle
/// through 0-3 so every bucket is equally represented.
pub fn synthetic_corpus(n: usize, seed: u64) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let label = (i % 4) as u8;
            let (text, gold) = document(&mut rng, label);
            Document {
                id: format!("synth-{i:04}"),
                url: None,
                text,
                coarse_label: Some(MagnitudeLabel::new(label).expect("label in range")),
                gold_spans: Some(vec![gold]),
            }
        })
        .collect()
}

/// The corpus shipped in `data/synthetic_corpus.jsonl`.
pub const BUNDLED_CORPUS: &str = include_str!("../data/synthetic_corpus.jsonl");
