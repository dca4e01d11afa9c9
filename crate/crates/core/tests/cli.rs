//! End-to-end runs of the `claimfact` binary against small fixture files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_claimfact"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn score_fixture() -> (TempDir, PathBuf, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let docs = write(
        dir.path(),
        "docs.jsonl",
        r#"{"id":"d1","text":"Mary went to the market. She bought apples. The market closed at noon."}
"#,
    );
    let sums = write(
        dir.path(),
        "sums.jsonl",
        r#"{"id":"s1","document_id":"d1","text":"Mary bought apples."}
"#,
    );
    (dir, docs, sums)
}

#[test]
fn score_one_pair_writes_one_report_line() {
    let (_dir, docs, sums) = score_fixture();
    let o = run(&[
        "score",
        "--docs",
        s(&docs),
        "--summaries",
        s(&sums),
        "--nli-backend",
        "mock",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1);
    let v: Value = serde_json::from_str(out.lines().next().unwrap()).unwrap();
    assert_eq!(v["summary_id"], "s1");
    assert!(out.contains("\"score\":1.000000"));
}

#[test]
fn score_missing_document_exits_input_error_naming_id() {
    let (dir, docs, _) = score_fixture();
    let sums = write(
        dir.path(),
        "bad.jsonl",
        r#"{"id":"s1","document_id":"d1","text":"Mary bought apples."}
{"id":"s2","document_id":"ghost","text":"x"}
"#,
    );
    let out = dir.path().join("out.jsonl");
    let o = run(&[
        "score",
        "--docs",
        s(&docs),
        "--summaries",
        s(&sums),
        "-o",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("ghost"), "{err}");
    let line: Value = serde_json::from_str(err.lines().last().unwrap()).unwrap();
    assert_eq!(line["exit_code"], 2);
    assert!(!out.exists(), "no partial output on failure");
}

#[test]
fn score_warm_cache_is_byte_identical() {
    let (dir, docs, sums) = score_fixture();
    let cache = dir.path().join("cache");
    let args = [
        "score",
        "--docs",
        s(&docs),
        "--summaries",
        s(&sums),
        "--cache-dir",
        s(&cache),
    ];
    let cold = run(&args);
    assert_eq!(cold.status.code(), Some(0), "{}", stderr(&cold));
    assert!(fs::read_dir(&cache).unwrap().count() > 0);
    let warm = run(&args);
    assert_eq!(warm.status.code(), Some(0));
    assert_eq!(cold.stdout, warm.stdout);
    // and identical to an uncached run
    let plain = run(&["score", "--docs", s(&docs), "--summaries", s(&sums)]);
    assert_eq!(plain.stdout, cold.stdout);
}

#[test]
fn config_file_and_flag_precedence() {
    let (dir, docs, sums) = score_fixture();
    let cfg = write(dir.path(), "run.toml", "[scoring]\nj = 3\nT = 0.5\n");
    let o = run(&[
        "score",
        "--docs",
        s(&docs),
        "--summaries",
        s(&sums),
        "--config",
        s(&cfg),
        "--j",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["params"]["j"], 2); // flag beats file
    assert_eq!(v["params"]["T"], 0.5); // file beats default
    assert_eq!(v["params"]["max_coref_variants"], 20); // default

    let bad = write(dir.path(), "bad.toml", "[scoring]\nwindow = 3\n");
    let o = run(&[
        "score",
        "--docs",
        s(&docs),
        "--summaries",
        s(&sums),
        "--config",
        s(&bad),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_flag_and_subcommand_are_input_errors() {
    assert_eq!(run(&["score", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn extract_claims_passthrough_and_empty() {
    let dir = tempfile::tempdir().unwrap();
    let sums = write(
        dir.path(),
        "sums.jsonl",
        r#"{"id":"a","text":"One. Two."}
{"id":"b","text":"Three."}
"#,
    );
    let cache = write(
        dir.path(),
        "claims.json",
        r#"{"a":["alpha claim","beta claim"],"b":["gamma claim"]}"#,
    );
    let out = dir.path().join("out.json");
    let o = run(&[
        "extract-claims",
        "--summaries",
        s(&sums),
        "--claim-backend",
        &format!("file-cache:{}", s(&cache)),
        "-o",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let got: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let want: Value = serde_json::from_str(&fs::read_to_string(&cache).unwrap()).unwrap();
    assert_eq!(got, want);

    let empty = write(dir.path(), "empty.jsonl", "");
    let o = run(&["extract-claims", "--summaries", s(&empty)]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v, serde_json::json!({}));
}

#[test]
fn extract_claims_unreachable_endpoint_is_backend_error() {
    let dir = tempfile::tempdir().unwrap();
    let sums = write(
        dir.path(),
        "sums.jsonl",
        "{\"id\":\"sum-42\",\"text\":\"Mary ran.\"}\n",
    );
    let cfg = write(
        dir.path(),
        "run.toml",
        "[claims]\nbackend = \"remote-llm\"\nendpoint = \"http://127.0.0.1:9/v1/chat/completions\"\ntimeout = 2\nmax_retries = 0\n",
    );
    let o = run(&[
        "extract-claims",
        "--summaries",
        s(&sums),
        "--config",
        s(&cfg),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("sum-42"), "{}", stderr(&o));
}

fn claim_file(dir: &Path, name: &str, rows: &[(&str, &[&str])]) -> PathBuf {
    let body: String = rows
        .iter()
        .map(|(id, claims)| {
            serde_json::json!({"summary_id": id, "claims": claims}).to_string() + "\n"
        })
        .collect();
    write(dir, name, &body)
}

fn eval(system: &Path, human: &Path) -> Value {
    let o = run(&["eval-claims", "--system", s(system), "--human", s(human)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn eval_claims_identical_disjoint_and_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let a = claim_file(
        dir.path(),
        "a.jsonl",
        &[("x", &["the cat sat", "dogs bark"]), ("y", &["it rained"])],
    );
    let v = eval(&a, &a);
    for k in ["easiness_p", "easiness_r", "easiness_f1"] {
        assert_eq!(v[k], 1.0, "{k}");
    }

    let b = claim_file(
        dir.path(),
        "b.jsonl",
        &[("x", &["zebra yak"]), ("y", &["quartz"])],
    );
    let v = eval(&a, &b);
    for k in ["easiness_p", "easiness_r", "easiness_f1"] {
        assert_eq!(v[k], 0.0, "{k}");
    }

    let sys = claim_file(dir.path(), "sys.jsonl", &[("x", &["the cat sat"])]);
    let hum = claim_file(
        dir.path(),
        "hum.jsonl",
        &[("x", &["the cat ran here", "dogs bark"])],
    );
    let v = eval(&sys, &hum);
    let close = |k: &str, want: f64| {
        assert!(
            (v[k].as_f64().unwrap() - want).abs() < 1e-9,
            "{k}: {}",
            v[k]
        )
    };
    close("easiness_p", 4.0 / 7.0);
    close("easiness_r", 2.0 / 7.0);
    close("easiness_f1", 8.0 / 21.0);
}

/// Two datasets, each with validation and test splits holding both labels.
/// Factual summaries copy a source sentence; the others share no words with
/// the source.
fn benchmark_records(dir: &Path, all_factual: bool) -> PathBuf {
    let mut body = String::new();
    let mut n = 0;
    for dataset in ["alpha", "beta"] {
        for split in ["validation", "test"] {
            for i in 0..4 {
                let factual = all_factual || i % 2 == 0;
                let doc =
                    format!("The council approved budget {n}. Residents attended the meeting {n}.");
                let summary = if factual {
                    format!("The council approved budget {n}.")
                } else {
                    "Volcanoes erupted yesterday somewhere.".to_string()
                };
                body.push_str(
                    &serde_json::json!({
                        "record_id": format!("r{n}"),
                        "document": doc,
                        "summary": summary,
                        "gold_label": if factual { 1 } else { 0 },
                        "system": "sys",
                        "dataset": dataset,
                        "split": split,
                    })
                    .to_string(),
                );
                body.push('\n');
                n += 1;
            }
        }
    }
    write(
        dir,
        if all_factual {
            "degenerate.jsonl"
        } else {
            "records.jsonl"
        },
        &body,
    )
}

fn benchmark(records: &Path, extra: &[&str]) -> Value {
    let mut args = vec!["benchmark", "--records", s(records)];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn benchmark_separable_fixture_reaches_full_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let records = benchmark_records(dir.path(), false);
    let csv = dir.path().join("scores.csv");
    let v = benchmark(&records, &["--scores-csv", s(&csv)]);
    assert_eq!(v["average_balanced_accuracy"], 1.0);
    for d in v["datasets"].as_array().unwrap() {
        assert_eq!(d["balanced_accuracy"], 1.0);
    }
    let csv = fs::read_to_string(&csv).unwrap();
    assert!(csv.starts_with("record_id,dataset,split,system,gold_label,score,prediction"));
    assert_eq!(csv.lines().count(), 17);
}

#[test]
fn benchmark_protocols_tune_different_numbers_of_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let records = benchmark_records(dir.path(), false);
    let per = benchmark(&records, &["--protocol", "per_split"]);
    let single = benchmark(&records, &["--protocol", "single_threshold"]);
    assert_eq!(per["thresholds"].as_array().unwrap().len(), 2);
    assert_eq!(single["thresholds"].as_array().unwrap().len(), 1);
}

#[test]
fn benchmark_nli_coref_without_clusters_equals_nli_claim() {
    let dir = tempfile::tempdir().unwrap();
    let records = benchmark_records(dir.path(), false);
    let coref = benchmark(
        &records,
        &["--mode", "nli_coref", "--coref-backend", "none"],
    );
    let claim = benchmark(&records, &["--mode", "nli_claim"]);
    assert_eq!(coref["records"], claim["records"]);
    assert_eq!(coref["datasets"], claim["datasets"]);
}

#[test]
fn benchmark_is_repeatable_with_score_cache() {
    let dir = tempfile::tempdir().unwrap();
    let records = benchmark_records(dir.path(), false);
    let cache = dir.path().join("cache");
    let a = run(&[
        "benchmark",
        "--records",
        s(&records),
        "--cache-dir",
        s(&cache),
    ]);
    let b = run(&[
        "benchmark",
        "--records",
        s(&records),
        "--cache-dir",
        s(&cache),
    ]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn benchmark_single_class_labels_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let records = benchmark_records(dir.path(), true);
    let o = run(&["benchmark", "--records", s(&records)]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(
        stderr(&o).contains("degenerate") || stderr(&o).contains("class"),
        "{}",
        stderr(&o)
    );
}
