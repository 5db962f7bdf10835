use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use sse_core::cli::run_cli;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("sse").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let r = run(&full);
    assert_eq!(r.code, 0, "{args:?}: {}", r.stderr);
    serde_json::from_str(&r.stdout).expect("one JSON document")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Writes a JSONL corpus, ingests and indexes it. Returns the index path.
fn indexed(dir: &Path, lines: &[&str]) -> PathBuf {
    let input = dir.join("in.jsonl");
    fs::write(&input, lines.join("\n")).unwrap();
    let corpus = dir.join("corpus.json");
    let index = dir.join("index.sse");
    assert_eq!(run(&["ingest", p(&input), "--out", p(&corpus)]).code, 0);
    assert_eq!(run(&["build", p(&corpus), "--out", p(&index)]).code, 0);
    index
}

fn sample(dir: &Path) -> PathBuf {
    indexed(
        dir,
        &[
            r#"{"id":"a","text":"Amara K. M. Okafor wrote about social network extraction"}"#,
            r#"{"id":"b","text":"Okafor, Amara: social network of authors"}"#,
            r#"{"id":"c","text":"network social graph"}"#,
            r#"{"id":"d","text":"unrelated text here"}"#,
        ],
    )
}

#[test]
fn single_word_phrase_equals_contains() {
    let dir = tempfile::tempdir().unwrap();
    let index = sample(dir.path());
    let a = json(&["query", "-i", p(&index), "--term", "social", "--mode", "phrase"]);
    let b = json(&["query", "-i", p(&index), "--term", "social", "--mode", "contains"]);
    assert_eq!(a["cardinality"], 3);
    assert_eq!(a["cardinality"], b["cardinality"]);
}

#[test]
fn query_modes_and_ids() {
    let dir = tempfile::tempdir().unwrap();
    let index = sample(dir.path());
    let contains = json(&["query", "-i", p(&index), "--term", "Social Network", "--show-ids"]);
    assert_eq!(contains["mode"], "CONTAINS_ALL");
    assert_eq!(contains["doc_ids"], serde_json::json!([0, 1, 2]));
    assert_eq!(contains["probability_exact"], "3/4");
    let phrase = json(&["query", "-i", p(&index), "--term", "social network", "--mode", "phrase"]);
    assert_eq!(phrase["cardinality"], 2);
    assert!(phrase.get("doc_ids").is_none());

    let text = run(&["query", "-i", p(&index), "--term", "amara okafor"]);
    assert_eq!(text.code, 0);
    assert!(text.stdout.contains("cardinality: 2"), "{}", text.stdout);
}

#[test]
fn prob_reports_both_probabilities() {
    let dir = tempfile::tempdir().unwrap();
    let index = sample(dir.path());
    let v = json(&["prob", "-i", p(&index), "--term", "Amara K. M. Okafor"]);
    assert_eq!(v["k"], 4);
    assert_eq!(v["subset_probability_exact"], "1/15");
    assert_eq!(v["event_probability_exact"], "1/4");
    assert_eq!(v["cardinality"], 1);
}

#[test]
fn subsets_lists_all() {
    let v = json(&["subsets", "--term", "Amara Bello Cruz Okafor"]);
    assert_eq!(v["count"], 15);
    assert_eq!(v["subsets"].as_array().unwrap().len(), 15);
    assert_eq!(v["subsets"][0], "amara");
    assert_eq!(run(&["subsets", "--term", "!!!"]).code, 1);
}

#[test]
fn audit_lemma2_on_noise_free_synthetic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("spec.json"),
        r#"{"groups":[{"term":"alpha beta","docs":20},{"term":"gamma","docs":20},{"term":"delta","docs":20}],"noise":0}"#,
    )
    .unwrap();
    fs::write(
        d.join("pairs.json"),
        r#"[["alpha beta","gamma"],["alpha beta","delta"],["gamma","delta"]]"#,
    )
    .unwrap();
    let corpus = d.join("c.json");
    let index = d.join("i.sse");
    assert_eq!(run(&["synth", "--spec", p(&d.join("spec.json")), "--seed", "42", "-o", p(&corpus)]).code, 0);
    assert_eq!(run(&["build", p(&corpus), "-o", p(&index)]).code, 0);
    let report = json(&["audit", "-i", p(&index), "--lemma", "l2", "--pairs", p(&d.join("pairs.json"))]);
    assert_eq!(report["lemma_id"], "L2");
    assert_eq!(report["hold_rate"], 1.0);
    assert_eq!(report["pairs_tested"], 3);
    assert_eq!(report["verdicts"][0]["cards"]["x"], 20);

    fs::write(d.join("terms.json"), r#"["gamma","delta","alpha beta"]"#).unwrap();
    let indep = json(&["audit", "-i", p(&index), "--lemma", "indep", "--pairs", p(&d.join("terms.json"))]);
    assert_eq!(indep["aggregate_bias"], 0);
    assert_eq!(indep["verdicts"][0]["t_x"], "alpha beta");
}

#[test]
fn audit_errors_have_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let index = sample(d);
    fs::write(d.join("bad.json"), r#"[["social network","network"]]"#).unwrap();
    let r = run(&["audit", "-i", p(&index), "--lemma", "l2", "--pairs", p(&d.join("bad.json"))]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("pair 0"), "{}", r.stderr);

    fs::write(d.join("shape.json"), r#"["social"]"#).unwrap();
    let r = run(&["audit", "-i", p(&index), "--lemma", "l1", "--pairs", p(&d.join("shape.json"))]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("--pairs"));

    fs::write(d.join("garbage.json"), "{not json").unwrap();
    let r = run(&["audit", "-i", p(&index), "--lemma", "l1", "--pairs", p(&d.join("garbage.json"))]);
    assert_eq!(r.code, 2);

    let r = run(&["audit", "-i", p(&index), "--lemma", "l1", "--pairs", "/nonexistent.json"]);
    assert_eq!(r.code, 2);
}

#[test]
fn io_and_format_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bogus = dir.path().join("bogus.sse");
    fs::write(&bogus, b"NOPE....").unwrap();
    assert_eq!(run(&["query", "-i", p(&bogus), "--term", "x"]).code, 2);
    assert_eq!(run(&["query", "-i", "/nonexistent/i.sse", "--term", "x"]).code, 2);
    assert_eq!(run(&["stats", "/nonexistent/i.sse"]).code, 2);

    let index = sample(dir.path());
    let mut bytes = fs::read(&index).unwrap();
    bytes.truncate(bytes.len() / 2);
    fs::write(&index, bytes).unwrap();
    let r = run(&["query", "-i", p(&index), "--term", "x"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("corrupt index at byte"), "{}", r.stderr);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["query", "--bogus-flag"]).code, 1);
    assert_eq!(run(&[]).code, 1);
    assert_eq!(run(&["subsets", "--term", "a", "--mode", "nope"]).code, 1);
    assert_eq!(run(&["--help"]).code, 0);
}

#[test]
fn stats_on_corpus_and_index() {
    let dir = tempfile::tempdir().unwrap();
    let index = indexed(dir.path(), &[r#"{"text":"a b a"}"#, r#"{"id":"x"}"#]);
    let i = json(&["stats", p(&index)]);
    assert_eq!(i["kind"], "index");
    assert_eq!((i["doc_count"].as_u64(), i["total_tokens"].as_u64(), i["vocabulary_size"].as_u64()), (Some(1), Some(3), Some(2)));
    let c = json(&["stats", p(&dir.path().join("corpus.json"))]);
    assert_eq!(c["kind"], "corpus");
    assert_eq!(c["total_tokens"], 3);
}

#[test]
fn ingest_reports_malformed_and_keeps_going() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.jsonl");
    fs::write(&input, "{\"text\":\"a\"}\n{\"id\":\"no text\"}\n{\"text\":\"b\"}\n").unwrap();
    let out = dir.path().join("c.json");
    let r = run(&["--format", "json", "ingest", p(&input), "-o", p(&out)]);
    assert_eq!(r.code, 0);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["documents"], 2);
    assert_eq!(v["malformed"][0]["line"], 2);
    assert!(r.stderr.contains("line 2"));
}

#[test]
fn binary_respects_sse_format_env() {
    let dir = tempfile::tempdir().unwrap();
    let index = sample(dir.path());
    let output = Command::new(env!("CARGO_BIN_EXE_sse"))
        .args(["query", "-i", p(&index), "--term", "network"])
        .env("SSE_FORMAT", "json")
        .output()
        .unwrap();
    assert!(output.status.success());
    let v: Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(v["cardinality"], 3);

    let output = Command::new(env!("CARGO_BIN_EXE_sse"))
        .args(["query", "-i", p(&index)])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}
