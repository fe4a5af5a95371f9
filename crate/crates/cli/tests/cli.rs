use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use duke::report::parse_indices;
use duke::Report;

fn duke(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_duke"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_report(out: &Output) -> Report {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    Report::parse(&String::from_utf8_lossy(&out.stdout)).unwrap()
}

fn stderr_line(out: &Output) -> String {
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert_eq!(err.lines().count(), 1, "expected one line, got {err:?}");
    err
}

/// Writes the two-cluster example and returns (embeddings, weights) paths.
fn figure1(dir: &Path) -> (String, String) {
    let emb = dir.join("fig.csv");
    let out = duke(&["gen", "--kind", "figure1", "--out", emb.to_str().unwrap()]);
    assert!(out.status.success());
    (
        emb.to_str().unwrap().to_string(),
        dir.join("fig.weights.csv").to_str().unwrap().to_string(),
    )
}

#[test]
fn figure1_selection_scores_six() {
    let dir = tempfile::tempdir().unwrap();
    let (emb, w) = figure1(dir.path());
    let args = [
        "select",
        "--embeddings",
        &emb,
        "--weights",
        &w,
        "--method",
        "duke",
        "--k",
        "8",
        "--lambda",
        "1",
        "--gamma",
        "2",
        "--metric",
        "euclidean",
    ];
    let r = stdout_report(&duke(&args));
    assert_eq!(r.get_f64("solution", "objective"), Some(6.0));
    assert_eq!(r.get("config", "metric"), Some("euclidean"));
    assert!(r.get_f64("timing", "select_ms").is_some());

    let oracle = stdout_report(&duke(&[
        "oracle",
        "--embeddings",
        &emb,
        "--weights",
        &w,
        "--k",
        "8",
        "--lambda",
        "1",
        "--metric",
        "euclidean",
    ]));
    assert_eq!(oracle.get_f64("oracle", "objective"), Some(6.0));
}

#[test]
fn margin_picks_smallest_weights() {
    let dir = tempfile::tempdir().unwrap();
    let emb = dir.path().join("e.csv");
    let w = dir.path().join("w.csv");
    fs::write(&emb, "0,0\n1,0\n0,1\n").unwrap();
    fs::write(&w, "0.9\n0.1\n0.5\n").unwrap();
    let r = stdout_report(&duke(&[
        "select",
        "--embeddings",
        emb.to_str().unwrap(),
        "--weights",
        w.to_str().unwrap(),
        "--method",
        "margin",
        "--k",
        "2",
        "--metric",
        "euclidean",
    ]));
    assert_eq!(
        parse_indices(r.get("solution", "indices").unwrap()).unwrap(),
        vec![1, 2]
    );
}

#[test]
fn probabilities_become_margins() {
    let dir = tempfile::tempdir().unwrap();
    let emb = dir.path().join("e.csv");
    let p = dir.path().join("p.csv");
    fs::write(&emb, "0,0\n1,0\n0,1\n").unwrap();
    fs::write(&p, "0.95,0.05\n0.5,0.5\n0.7,0.3\n").unwrap();
    let r = stdout_report(&duke(&[
        "select",
        "--embeddings",
        emb.to_str().unwrap(),
        "--probs",
        p.to_str().unwrap(),
        "--method",
        "margin",
        "--k",
        "1",
        "--metric",
        "euclidean",
    ]));
    assert_eq!(r.get("solution", "indices"), Some("1"));
}

#[test]
fn grid_search_traces_every_gamma() {
    let dir = tempfile::tempdir().unwrap();
    let (emb, w) = figure1(dir.path());
    let r = stdout_report(&duke(&[
        "select",
        "--embeddings",
        &emb,
        "--weights",
        &w,
        "--k",
        "4",
        "--metric",
        "euclidean",
    ]));
    assert_eq!(r.get("trace", "entries"), Some("8"));
    assert_eq!(r.get("config", "gamma"), Some("search"));
    let gammas: Vec<f64> = (0..8)
        .map(|i| r.get_f64("trace", &format!("gamma_{i}")).unwrap())
        .collect();
    assert!(gammas.windows(2).all(|p| p[0] < p[1]));
}

#[test]
fn parallel_reports_workers() {
    let dir = tempfile::tempdir().unwrap();
    let (emb, w) = figure1(dir.path());
    let r = stdout_report(&duke(&[
        "select",
        "--embeddings",
        &emb,
        "--weights",
        &w,
        "--k",
        "4",
        "--method",
        "parallel",
        "--machines",
        "3",
        "--gamma",
        "2",
        "--metric",
        "euclidean",
    ]));
    let workers = r.get_section("workers").unwrap();
    assert_eq!(workers.entries.len(), 3);
    assert_eq!(r.get("solution", "machines"), Some("3"));
}

#[test]
fn reports_are_reproducible_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let (emb, w) = figure1(dir.path());
    let args = [
        "select",
        "--embeddings",
        &emb,
        "--weights",
        &w,
        "--k",
        "3",
        "--method",
        "random",
        "--seed",
        "7",
        "--metric",
        "euclidean",
    ];
    let strip = |mut r: Report| {
        r.sections.retain(|s| s.name != "timing");
        r
    };
    let a = strip(stdout_report(&duke(&args)));
    let b = strip(stdout_report(&duke(&args)));
    assert_eq!(a.to_string(), b.to_string());
}

#[test]
fn zero_trial_verify_passes() {
    let r = stdout_report(&duke(&["verify", "--trials", "0"]));
    assert_eq!(r.get("verify", "trials"), Some("0"));
}

#[test]
fn small_verify_on_euclidean_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.txt");
    let out = duke(&[
        "verify",
        "--trials",
        "20",
        "--metrics",
        "euclidean",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = Report::parse(&fs::read_to_string(path).unwrap()).unwrap();
    assert!(r.get_section("suite theorem1[euclidean]").is_some());
}

#[test]
fn graph_export_lists_each_point() {
    let dir = tempfile::tempdir().unwrap();
    let (emb, _) = figure1(dir.path());
    let out = duke(&[
        "graph",
        "--embeddings",
        &emb,
        "--k-nn",
        "2",
        "--metric",
        "euclidean",
    ]);
    assert!(out.status.success());
    assert!(!out.stdout.is_empty());
}

#[test]
fn usage_errors_exit_one() {
    let out = duke(&["select", "--k", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_line(&out).starts_with("error kind=Usage"));

    let out = duke(&[
        "select",
        "--embeddings",
        "e",
        "--weights",
        "w",
        "--probs",
        "p",
        "--k",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    stderr_line(&out);
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let out = duke(&["graph", "--embeddings", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_line(&out).starts_with("error kind="));

    let emb = dir.path().join("e.csv");
    let w = dir.path().join("w.csv");
    fs::write(&emb, "0,0\n1,0\n").unwrap();
    fs::write(&w, "0.5\n").unwrap();
    let out = duke(&[
        "select",
        "--embeddings",
        emb.to_str().unwrap(),
        "--weights",
        w.to_str().unwrap(),
        "--k",
        "1",
        "--method",
        "margin",
    ]);
    assert_eq!(out.status.code(), Some(2));
    stderr_line(&out);

    fs::write(&w, "0.5\n0.2\n").unwrap();
    let out = duke(&[
        "select",
        "--embeddings",
        emb.to_str().unwrap(),
        "--weights",
        w.to_str().unwrap(),
        "--k",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    stderr_line(&out);
}
