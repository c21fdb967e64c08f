use std::fs;
use std::path::Path;

use crowdspan::corpus::{write_jsonl, Document};
use crowdspan::quantity::tokenize;
use crowdspan::shingle::{make_shingles, ConstantScorer};
use crowdspan_cli::{run, EXIT_CHECK_FAILED, EXIT_DATA, EXIT_OK, EXIT_USAGE};

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("crowdspan").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn usage_errors_exit_one() {
    let (code, _, err) = call(&["frobnicate"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("Usage"));
    assert_eq!(call(&[]).0, EXIT_USAGE);
    assert_eq!(call(&["--help"]).0, EXIT_OK);
    assert_eq!(call(&["split", "--corpus", "x.jsonl"]).0, EXIT_USAGE);
}

#[test]
fn bad_config_exits_one_and_bad_data_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"shingle_width": 500}"#).unwrap();
    let corpus = dir.path().join("c.jsonl");
    fs::write(&corpus, "{\"id\":\"a\",\"text\":\"x\"}\nnot json\n").unwrap();
    assert_eq!(call(&["--config", p(&cfg), "shingle", "--corpus", p(&corpus)]).0, EXIT_USAGE);
    let (code, _, err) = call(&["shingle", "--corpus", p(&corpus)]);
    assert_eq!(code, EXIT_DATA);
    assert!(err.contains("line 2"), "{err}");
    fs::write(&corpus, "{\"id\":\"a\",\"text\":\"x\"}\n").unwrap();
    assert_eq!(call(&["extract", "--corpus", p(&corpus)]).0, EXIT_DATA);
}

#[test]
fn extract_then_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    let preds = dir.path().join("p.jsonl");
    assert_eq!(call(&["synth-corpus", "--docs", "20", "--out", p(&corpus)]).0, EXIT_OK);
    assert_eq!(call(&["extract", "--corpus", p(&corpus), "--out", p(&preds)]).0, EXIT_OK);
    let (code, out, _) = call(&["evaluate", "--predictions", p(&preds), "--gold", p(&corpus)]);
    assert_eq!(code, EXIT_OK);
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["exact_match"], 1.0);
    assert_eq!(report["n_docs"], 20);
    assert!(report.get("per_doc").is_none());
    let (_, out, _) = call(&["evaluate", "--predictions", p(&preds), "--gold", p(&corpus), "--per-doc"]);
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["per_doc"].as_array().unwrap().len(), 20);
}

#[test]
fn weak_labels_reload_as_a_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    let weak = dir.path().join("w.jsonl");
    call(&["synth-corpus", "--docs", "12", "--out", p(&corpus)]);
    assert_eq!(call(&["weak-labels", "--corpus", p(&corpus), "--out", p(&weak)]).0, EXIT_OK);
    let docs = crowdspan::corpus::load_corpus(&weak).unwrap();
    assert_eq!(docs, crowdspan::corpus::load_corpus(&corpus).unwrap());
}

#[test]
fn ingest_directory() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("html");
    fs::create_dir(&src).unwrap();
    fs::write(src.join("b.html"), "<p>About 300 protesters gathered.</p><script>x=1</script>").unwrap();
    fs::write(src.join("a.txt"), "  plain text  \n").unwrap();
    fs::write(src.join("skip.pdf"), "%PDF").unwrap();
    let (code, out, _) = call(&["ingest", "--dir", p(&src)]);
    assert_eq!(code, EXIT_OK);
    let docs = crowdspan::corpus::read_corpus(out.as_bytes()).unwrap();
    let ids: Vec<&str> = docs.iter().map(|d| d.id.as_str()).collect();
    assert_eq!(ids, ["a", "b"]);
    assert_eq!(docs[0].text, "plain text");
    assert_eq!(docs[1].text, "About 300 protesters gathered.");
}

#[test]
fn parse_numbers_lists_phrases() {
    let (code, out, _) = call(&["parse-numbers", "--text", "In 1999, several thousand marched and 2,000 watched."]);
    assert_eq!(code, EXIT_OK);
    let values: Vec<u64> = out
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["value"].as_u64().unwrap())
        .collect();
    assert_eq!(values, [3000, 2000]);
}

#[test]
fn shingle_and_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let text = (0..1000).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
    let docs = vec![Document::new("long", text.clone()), Document::new("short", "only a few words here")];
    let corpus = dir.path().join("c.jsonl");
    write_jsonl(fs::File::create(&corpus).unwrap(), &docs).unwrap();

    let (code, out, _) = call(&["shingle", "--corpus", p(&corpus)]);
    assert_eq!(code, EXIT_OK);
    let starts: Vec<u64> = out
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["window_start"].as_u64().unwrap())
        .collect();
    assert_eq!(starts, [0, 225, 450, 550, 0]);

    // Slot 7 is the first context slot after a 5-token question; shingle 2 starts at token 450.
    let tokens = tokenize(&text);
    let shingles = make_shingles("long", &tokens, 450, 225).unwrap();
    let mut preds: Vec<_> = shingles.iter().map(|s| ConstantScorer::default().score(s, 512)).collect();
    preds[2] = ConstantScorer { start_slot: 7, end_slot: 9, peak: 0.95 }.score(&shingles[2], 512);
    let pred_path = dir.path().join("p.jsonl");
    write_jsonl(fs::File::create(&pred_path).unwrap(), &preds).unwrap();
    let (code, out, err) = call(&["aggregate", "--corpus", p(&corpus), "--predictions", p(&pred_path)]);
    assert_eq!(code, EXIT_OK, "{err}");
    let span: serde_json::Value = serde_json::from_str(out.lines().next().unwrap()).unwrap();
    assert_eq!(span["shingle_index"], 2);
    assert_eq!(span["span_text"], "w450 w451 w452");
    assert_eq!(out.lines().count(), 1);
}

#[test]
fn kernel_commands() {
    let (code, out, _) = call(&["kernel-check", "--instances", "10"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("\"passed\": true"));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"steps": 20, "toy_docs": 5}"#).unwrap();
    let (code, out, _) = call(&["--config", p(&cfg), "kernel-demo", "--precision", "f32"]);
    assert_eq!(code, EXIT_OK);
    let trace: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(trace["loss"].as_array().unwrap().len(), 21);
    assert_eq!(trace["final_masks"].as_array().unwrap().len(), 5);
    assert_eq!(call(&["kernel-check", "--instances", "3", "--tolerance", "0"]).0, EXIT_CHECK_FAILED);
}
