//! The `crowdspan` command line. [`run`] is the whole program; `main` only
//! forwards its exit code.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crowdspan::corpus::{
    emit_weak_labels, ingest_html, load_corpus, materialize_split, parse_ratio, read_jsonl, split_corpus,
    write_jsonl, write_split, Allocation, Document, SplitSpec,
};
use crowdspan::heuristic::NoneReason;
use crowdspan::kernel::{check, toy_fit};
use crowdspan::metrics::{evaluate, Prediction};
use crowdspan::quantity::tokenize;
use crowdspan::shingle::{aggregate_predictions, make_shingles, ShinglePrediction, ShingleRecord};
use crowdspan::synthetic::{synthetic_corpus, SYNTHETIC_DOCS, SYNTHETIC_SEED};
use crowdspan::{Config, Error};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "crowdspan", version, about = "Crowd-size span extraction pipelines")]
struct Cli {
    /// JSON file overriding configuration defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert a directory of .html/.htm/.txt files into a corpus.
    Ingest {
        #[arg(long)]
        dir: PathBuf,
    },
    /// Partition a corpus into coarse-train, gold-span-train, validation and test.
    Split(SplitArgs),
    /// List the number phrases in a text.
    ParseNumbers {
        #[arg(long, conflicts_with = "input")]
        text: Option<String>,
        /// Text file; stdin when neither this nor --text is given.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Run the heuristic extractor over a labelled corpus.
    Extract {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Replace gold spans with heuristic spans.
    WeakLabels {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Cut each document into overlapping token windows.
    Shingle {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Pick one span per document from per-shingle score vectors.
    Aggregate {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
    },
    /// Train the toy masked model on synthetic data and print its trace.
    KernelDemo {
        #[arg(long, value_enum, default_value_t = Precision::F64)]
        precision: Precision,
    },
    /// Run the gradient and mask self-checks.
    KernelCheck {
        #[arg(long, default_value_t = 100)]
        instances: usize,
        /// Largest accepted relative gradient error.
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
    /// Score predictions against gold spans.
    Evaluate {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        per_doc: bool,
    },
    /// Generate the labelled synthetic corpus.
    SynthCorpus {
        #[arg(long, default_value_t = SYNTHETIC_DOCS)]
        docs: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Precision {
    F32,
    F64,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Four document counts, e.g. 2694,25,200,930.
    #[arg(long, value_delimiter = ',', required_unless_present = "ratios", conflicts_with = "ratios")]
    counts: Option<Vec<usize>>,
    /// Four fractions summing to 1, e.g. 0.7,0.1,0.1,0.1 or 7/10,...
    #[arg(long, value_delimiter = ',')]
    ratios: Option<Vec<String>>,
    /// Directory for the split files; defaults to --out, then "splits".
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Keep gold-span-train documents whole.
    #[arg(long)]
    no_truncate: bool,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

#[derive(Debug, Serialize)]
struct ExtractRecord {
    id: String,
    span_text: Option<String>,
    start_char: Option<usize>,
    end_char: Option<usize>,
    fallback_used: bool,
    none_reason: Option<NoneReason>,
}

#[derive(Debug, Serialize)]
struct Report {
    exact_match: f64,
    f1: f64,
    n_docs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    per_doc: Option<Vec<crowdspan::metrics::DocScore>>,
}

/// Parses `args` (program name first) and runs the command, writing results
/// to `stdout` unless `--out` is given. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Usage(m) => (EXIT_USAGE, m),
                Failure::Data(m) => (EXIT_DATA, m),
                Failure::Check(m) => (EXIT_CHECK_FAILED, m),
            };
            let _ = writeln!(stderr, "crowdspan: {msg}");
            code
        }
    }
}

fn load_config(cli: &Cli) -> std::result::Result<Config, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

/// Sends output to `--out` or the given stdout.
fn emit(out: &Option<PathBuf>, stdout: &mut dyn Write, write: impl FnOnce(&mut dyn Write) -> Outcome) -> Outcome {
    match out {
        Some(path) => {
            let mut file = BufWriter::new(fs::File::create(path)?);
            write(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => write(stdout),
    }
}

fn jsonl<T: Serialize>(records: &[T]) -> impl FnOnce(&mut dyn Write) -> Outcome + '_ {
    move |w| Ok(write_jsonl(w, records)?)
}

fn json<T: Serialize>(value: &T) -> impl FnOnce(&mut dyn Write) -> Outcome + '_ {
    move |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Outcome {
    let cfg = load_config(&cli)?;
    let out = &cli.out;
    match &cli.command {
        Command::Ingest { dir } => emit(out, stdout, jsonl(&ingest_dir(dir)?)),
        Command::Split(args) => split(args, &cfg, out.as_deref()),
        Command::ParseNumbers { text, input } => {
            let text = match (text, input) {
                (Some(t), _) => t.clone(),
                (None, Some(path)) => fs::read_to_string(path)?,
                (None, None) => {
                    let mut s = String::new();
                    io::stdin().read_to_string(&mut s)?;
                    s
                }
            };
            let phrases = cfg.number_finder().find(&tokenize(&text), &text);
            emit(out, stdout, jsonl(&phrases))
        }
        Command::Extract { corpus } => {
            let docs = load_corpus(corpus)?;
            let extractor = cfg.extractor()?;
            let records = docs
                .iter()
                .map(|d| {
                    let coarse = d
                        .coarse_label
                        .ok_or_else(|| Failure::Data(format!("document {} has no coarse_label", d.id)))?;
                    let r = extractor.extract_document(d, coarse);
                    Ok(ExtractRecord {
                        id: d.id.clone(),
                        fallback_used: r.fallback_used(),
                        span_text: r.span.as_ref().map(|s| s.text.clone()),
                        start_char: r.span.as_ref().map(|s| s.start_char),
                        end_char: r.span.as_ref().map(|s| s.end_char),
                        none_reason: r.none_reason,
                    })
                })
                .collect::<std::result::Result<Vec<_>, Failure>>()?;
            emit(out, stdout, jsonl(&records))
        }
        Command::WeakLabels { corpus } => {
            let docs = load_corpus(corpus)?;
            let extractor = cfg.extractor()?;
            let labelled = emit_weak_labels(&docs, |d, c| extractor.extract_document(d, c))?;
            emit(out, stdout, jsonl(&labelled))
        }
        Command::Shingle { corpus } => {
            let docs = load_corpus(corpus)?;
            let mut records: Vec<ShingleRecord> = Vec::new();
            for d in &docs {
                let tokens = tokenize(&d.text);
                for s in make_shingles(&d.id, &tokens, cfg.shingle_width, cfg.shingle_stride)? {
                    records.push(s.record(&tokens));
                }
            }
            emit(out, stdout, jsonl(&records))
        }
        Command::Aggregate { corpus, predictions } => {
            let docs = load_corpus(corpus)?;
            let preds: Vec<ShinglePrediction<f64>> = read_jsonl(fs::File::open(predictions)?)?;
            let known: std::collections::HashSet<&str> = docs.iter().map(|d| d.id.as_str()).collect();
            if let Some(p) = preds.iter().find(|p| !known.contains(p.doc_id.as_str())) {
                return Err(Failure::Data(format!("predictions for unknown document {}", p.doc_id)));
            }
            let limits = cfg.limits();
            let question_len = cfg.question_len();
            let mut spans = Vec::new();
            for d in &docs {
                let mine: Vec<ShinglePrediction<f64>> = preds.iter().filter(|p| p.doc_id == d.id).cloned().collect();
                if mine.is_empty() {
                    continue;
                }
                let tokens = tokenize(&d.text);
                let shingles = make_shingles(&d.id, &tokens, cfg.shingle_width, cfg.shingle_stride)?;
                spans.push(aggregate_predictions(&mine, &shingles, question_len, &limits, &tokens, &d.text)?);
            }
            emit(out, stdout, jsonl(&spans))
        }
        Command::KernelDemo { precision } => {
            let toy = cfg.toy();
            let trace = match precision {
                Precision::F64 => toy_fit::<f64>(&toy)?,
                Precision::F32 => toy_fit::<f32>(&toy)?,
            };
            emit(out, stdout, json(&trace))
        }
        Command::KernelCheck { instances, tolerance } => {
            let gradient = check::gradient_check(*instances, 16, 4, &[0.0, cfg.lambda], 1e-5, *tolerance, cfg.seed)?;
            let mask = check::mask_check(16, *instances, cfg.seed)?;
            let passed = gradient.passed && mask.passed;
            let report = serde_json::json!({ "gradient": gradient, "mask": mask, "passed": passed });
            emit(out, stdout, json(&report))?;
            if passed {
                Ok(())
            } else {
                Err(Failure::Check("kernel self-check failed".into()))
            }
        }
        Command::Evaluate { predictions, gold, per_doc } => {
            let preds: Vec<Prediction> = read_jsonl(fs::File::open(predictions)?)?;
            let docs = load_corpus(gold)?;
            let r = evaluate(&preds, &docs)?;
            let report = Report {
                exact_match: r.exact_match,
                f1: r.f1,
                n_docs: r.n_docs,
                per_doc: per_doc.then_some(r.per_doc),
            };
            emit(out, stdout, json(&report))
        }
        Command::SynthCorpus { docs } => {
            let seed = cli.seed.unwrap_or(SYNTHETIC_SEED);
            emit(out, stdout, jsonl(&synthetic_corpus(*docs, seed)))
        }
    }
}

fn ingest_dir(dir: &Path) -> std::result::Result<Vec<Document>, Failure> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<io::Result<_>>()?;
    paths.sort();
    let mut docs: Vec<Document> = Vec::new();
    for path in paths {
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        let html = match ext.as_deref() {
            Some("html" | "htm") => true,
            Some("txt") => false,
            _ => continue,
        };
        let Some(id) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        let raw = fs::read_to_string(&path)?;
        let text = if html { ingest_html(&raw) } else { raw.trim().to_string() };
        if docs.iter().any(|d| d.id == id) {
            return Err(Failure::Data(format!("two input files share the id {id}")));
        }
        docs.push(Document::new(id, text));
    }
    Ok(docs)
}

fn split(args: &SplitArgs, cfg: &Config, out: Option<&Path>) -> Outcome {
    let docs = load_corpus(&args.corpus)?;
    let four = |n: usize| {
        if n == 4 {
            Ok(())
        } else {
            Err(Failure::Usage(format!("expected four comma-separated values, got {n}")))
        }
    };
    let allocation = match (&args.counts, &args.ratios) {
        (Some(c), _) => {
            four(c.len())?;
            Allocation::Counts([c[0], c[1], c[2], c[3]])
        }
        (None, Some(r)) => {
            four(r.len())?;
            let r = r.iter().map(|s| parse_ratio(s)).collect::<crowdspan::Result<Vec<_>>>()?;
            Allocation::Ratios([r[0], r[1], r[2], r[3]])
        }
        (None, None) => return Err(Failure::Usage("one of --counts or --ratios is required".into())),
    };
    let spec = SplitSpec {
        allocation,
        seed: cfg.seed,
        truncate_gold_paragraphs: !args.no_truncate,
    };
    let result = split_corpus(&docs, &spec)?;
    let files = materialize_split(&docs, &result, spec.truncate_gold_paragraphs)?;
    let dir = args.out_dir.as_deref().or(out).unwrap_or(Path::new("splits"));
    write_split(dir, &files, cfg.seed)?;
    Ok(())
}
