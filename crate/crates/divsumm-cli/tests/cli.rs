//! Black-box tests of the CLI surface: flags, formats, exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn divsumm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_divsumm"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_fixtures(dir: &Path) {
    let corpus = concat!(
        "{\"id\":\"a\",\"text\":\"the cat sat on the mat\",\"dialect\":\"d1\"}\n",
        "{\"id\":\"b\",\"text\":\"a dog barked at the cat\",\"dialect\":\"d2\"}\n",
        "{\"id\":\"c\",\"text\":\"cats and dogs play\",\"dialect\":\"d1\"}\n",
        "{\"id\":\"d\",\"text\":\"the weather is nice today\",\"dialect\":\"d2\"}\n",
        "{\"id\":\"e\",\"text\":\"nice cat nice dog\",\"dialect\":\"d1\"}\n",
        "{\"id\":\"f\",\"text\":\"rainy weather for cats\",\"dialect\":\"d2\"}\n",
    );
    fs::write(dir.join("corpus.jsonl"), corpus).unwrap();
    let vecs = "6 3\ncat 1 0 0\ndog 0 1 0\nthe 0.1 0.1 0\nnice 0 0 1\nweather 0.5 0.5 0.5\ncats 0.9 0.1 0\n";
    fs::write(dir.join("vecs.txt"), vecs).unwrap();
    let control = concat!(
        "{\"id\":\"c1\",\"text\":\"cat\",\"dialect\":\"d1\"}\n",
        "{\"id\":\"c2\",\"text\":\"dog\",\"dialect\":\"d2\"}\n",
    );
    fs::write(dir.join("cs.jsonl"), control).unwrap();
}

#[test]
fn summarize_emits_summary_json() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let out = divsumm(
        &["summarize", "--corpus", "corpus.jsonl", "--algorithm", "tfidf", "--size", "3"],
        dir.path(),
    );
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["scorer"], "tfidf");
    assert_eq!(doc["entries"].as_array().unwrap().len(), 3);
    assert_eq!(doc["entries"][0]["rank"], 1);
}

#[test]
fn summarize_centroid_without_embeddings_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let out = divsumm(
        &["summarize", "--corpus", "corpus.jsonl", "--algorithm", "centroid", "--size", "2"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--embeddings"));
}

#[test]
fn summarize_balanced_fills_provenance() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let out = divsumm(
        &[
            "summarize", "--corpus", "corpus.jsonl", "--algorithm", "tfidf", "--size", "3",
            "--control-set", "cs.jsonl", "--embeddings", "vecs.txt", "--alpha", "0.5",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["alpha"], 0.5);
    assert_eq!(doc["control_set"], "cs");
}

#[test]
fn summarize_mmr_with_control_set_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let out = divsumm(
        &[
            "summarize", "--corpus", "corpus.jsonl", "--algorithm", "mmr", "--size", "2",
            "--control-set", "cs.jsonl", "--embeddings", "vecs.txt",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn summarize_missing_corpus_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = divsumm(
        &["summarize", "--corpus", "absent.jsonl", "--algorithm", "tfidf", "--size", "2"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn summarize_external_scores() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let scores: String = ["a", "b", "c", "d", "e", "f"]
        .iter()
        .enumerate()
        .map(|(i, id)| format!("{{\"id\":\"{id}\",\"score\":{}}}\n", i as f64 / 10.0))
        .collect();
    fs::write(dir.path().join("scores.jsonl"), scores).unwrap();
    let out = divsumm(
        &[
            "summarize", "--corpus", "corpus.jsonl", "--algorithm", "external",
            "--scores", "scores.jsonl", "--size", "2",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["entries"][0]["id"], "f");
}

#[test]
fn evaluate_summary_against_itself_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let out = divsumm(
        &[
            "summarize", "--corpus", "corpus.jsonl", "--algorithm", "tfidf", "--size", "2",
            "--output", "summ.json",
        ],
        dir.path(),
    );
    assert!(out.status.success());

    // Build the reference from the emitted summary's own texts.
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summ.json")).unwrap()).unwrap();
    let lines: Vec<String> = doc["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["text"].as_str().unwrap().to_string())
        .collect();
    fs::write(dir.path().join("ref.txt"), lines.join("\n")).unwrap();

    let out = divsumm(
        &["evaluate", "--summary", "summ.json", "--reference", "ref.txt"],
        dir.path(),
    );
    assert!(out.status.success());
    let eval: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(eval["rouge"]["r1_f"], 1.0);
    assert_eq!(eval["rouge"]["rl_f"], 1.0);
}

#[test]
fn evaluate_reports_dialect_fractions() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    divsumm(
        &[
            "summarize", "--corpus", "corpus.jsonl", "--algorithm", "tfidf", "--size", "4",
            "--output", "summ.json",
        ],
        dir.path(),
    );
    let out = divsumm(
        &["evaluate", "--summary", "summ.json", "--corpus", "corpus.jsonl"],
        dir.path(),
    );
    assert!(out.status.success());
    let eval: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let fractions = eval["diversity"]["fractions"].as_object().unwrap();
    let total: f64 = fractions.values().map(|v| v.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn evaluate_without_inputs_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    divsumm(
        &[
            "summarize", "--corpus", "corpus.jsonl", "--algorithm", "tfidf", "--size", "2",
            "--output", "summ.json",
        ],
        dir.path(),
    );
    let out = divsumm(&["evaluate", "--summary", "summ.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn select_control_set_single_label_pool_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let pool = concat!(
        "{\"id\":\"p0\",\"text\":\"tok0\",\"dialect\":\"x\"}\n",
        "{\"id\":\"p1\",\"text\":\"tok1\",\"dialect\":\"x\"}\n",
        "{\"id\":\"p2\",\"text\":\"tok2\",\"dialect\":\"x\"}\n",
        "{\"id\":\"p3\",\"text\":\"tok3\",\"dialect\":\"x\"}\n",
    );
    fs::write(dir.path().join("pool.jsonl"), pool).unwrap();
    fs::write(
        dir.path().join("vecs.txt"),
        "4 2\ntok0 1 0\ntok1 0 1\ntok2 1 1\ntok3 0.5 0.5\n",
    )
    .unwrap();
    let out = divsumm(
        &[
            "select-control-set", "--pool", "pool.jsonl", "--embeddings", "vecs.txt",
            "--control-size", "2", "--folds", "2", "--trials", "1",
            "--control-set-out", "chosen.jsonl",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("two dialect labels"));
}

#[test]
fn experiment_writes_fixed_schema_csv() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let out = divsumm(
        &[
            "experiment", "--corpus", "corpus.jsonl", "--embeddings", "vecs.txt",
            "--control-set", "cs.jsonl", "--minority-label", "d2",
            "--collection-size", "4", "--repetitions", "2", "--sizes", "2",
            "--alphas", "0.0,0.5", "--compositions", "0.5", "--scorers", "tfidf,centroid",
            "--seed", "3",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scorer,alpha,m,composition,mean_minority_fraction,stderr_minority_fraction,\
         mean_r1_f,stderr_r1_f,repetitions"
            .replace(" ", "")
    );
    // 2 scorers x 2 alphas x 1 size x 1 composition.
    assert_eq!(lines.count(), 4);
}

#[test]
fn experiment_infeasible_composition_names_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let out = divsumm(
        &[
            "experiment", "--corpus", "corpus.jsonl", "--embeddings", "vecs.txt",
            "--control-set", "cs.jsonl", "--minority-label", "d2",
            "--collection-size", "6", "--repetitions", "1", "--sizes", "2",
            "--alphas", "0.5", "--compositions", "0.9",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("composition 0.9"));
}

#[test]
fn unknown_flag_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = divsumm(&["summarize", "--bogus"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}
