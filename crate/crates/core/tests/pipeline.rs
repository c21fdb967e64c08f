use crowdspan::corpus::{
    ingest_html, load_corpus, materialize_split, read_corpus, save_corpus, split_corpus, write_split, Allocation,
    Document, SplitSpec,
};
use crowdspan::heuristic::HeuristicExtractor;
use crowdspan::kernel::{toy_fit, ToyConfig};
use crowdspan::metrics::{evaluate, Prediction};
use crowdspan::synthetic::{synthetic_corpus, BUNDLED_CORPUS};
use crowdspan::Config;

#[test]
fn bundled_corpus_extracts_perfectly() {
    let docs = read_corpus(BUNDLED_CORPUS.as_bytes()).unwrap();
    assert!(docs.len() >= 200);
    let ex = Config::default().extractor().unwrap();
    let preds: Vec<Prediction> = docs
        .iter()
        .map(|d| {
            let r = ex.extract_document(d, d.coarse_label.unwrap());
            assert!(!r.fallback_used(), "{}", d.id);
            Prediction::new(&d.id, r.span.as_ref().map(|s| s.text.as_str()))
        })
        .collect();
    let report = evaluate(&preds, &docs).unwrap();
    assert_eq!((report.exact_match, report.f1), (1.0, 1.0));
}

#[test]
fn other_seeds_also_extract_perfectly() {
    let ex = HeuristicExtractor::default();
    for seed in [1, 77] {
        let docs = synthetic_corpus(80, seed);
        for d in &docs {
            let got = ex.extract_document(d, d.coarse_label.unwrap()).span.map(|s| s.text);
            assert_eq!(got.as_deref(), Some(d.golds()[0].text.as_str()), "{}", d.text);
        }
    }
}

#[test]
fn html_to_prediction() {
    let html = "<html><head><title>x</title><style>p{}</style></head><body>\
        <p>Rain fell on Monday.</p><p>About 300 protesters gathered &amp; marched in 2019.</p>\
        <script>var n = 5000;</script></body></html>";
    let text = ingest_html(html);
    assert!(!text.contains("5000") && text.contains("About 300 protesters gathered & marched"));
    let r = HeuristicExtractor::default().extract(&text, crowdspan::quantity::MagnitudeLabel::new(1).unwrap());
    assert_eq!(r.span.unwrap().text, "About 300");
}

#[test]
fn paper_split_sizes_on_disk() {
    let docs: Vec<Document> = (0..3849).map(|i| Document::new(format!("a{i}"), "text")).collect();
    let spec = SplitSpec {
        allocation: Allocation::Counts([2694, 25, 200, 930]),
        seed: 7,
        truncate_gold_paragraphs: true,
    };
    let r = split_corpus(&docs, &spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_split(dir.path(), &materialize_split(&docs, &r, true).unwrap(), 7).unwrap();
    for (name, want) in [("coarse_train", 2694), ("gold_span_train", 25), ("validation", 200), ("test", 930)] {
        assert_eq!(manifest.counts[name], want);
        assert_eq!(load_corpus(dir.path().join(&manifest.files[name])).unwrap().len(), want);
    }
    assert_eq!(split_corpus(&docs, &spec).unwrap(), r);
    let other = SplitSpec { seed: 8, ..spec };
    assert_ne!(split_corpus(&docs, &other).unwrap(), r);
}

#[test]
fn corpus_file_round_trip() {
    let docs = synthetic_corpus(10, 3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.jsonl");
    save_corpus(&path, &docs).unwrap();
    assert_eq!(load_corpus(&path).unwrap(), docs);
    std::fs::write(&path, "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"b\"}\n").unwrap();
    let err = load_corpus(&path).unwrap_err().to_string();
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn toy_fit_halves_the_loss_in_both_precisions() {
    let cfg = ToyConfig::default();
    let a = toy_fit::<f64>(&cfg).unwrap();
    assert!(a.final_loss <= 0.5 * a.initial_loss);
    assert_eq!(a.loss.len(), cfg.steps + 1);
    let b = toy_fit::<f32>(&cfg).unwrap();
    assert!(b.final_loss <= 0.5 * b.initial_loss);
    assert!((a.initial_loss - b.initial_loss).abs() < 1e-3);
}

#[test]
#[ignore = "planted mass stays near 0.3 with these hyperparameters"]
fn toy_fit_concentrates_mask_on_planted_span() {
    let trace = toy_fit::<f64>(&ToyConfig::default()).unwrap();
    assert!(trace.mean_planted_mass >= 0.5, "{}", trace.mean_planted_mass);
}
