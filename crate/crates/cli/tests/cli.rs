//! End-to-end checks of the `mbe` binary: exit codes, output formats, and
//! cross-configuration stability of the enumeration output.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mbe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbe"))
        .args(args)
        .output()
        .expect("failed to spawn mbe")
}

fn write_edges(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

/// Pseudo-random edge list, deterministic in `seed`.
fn random_edges(n_u: u64, n_v: u64, keep_mod: u64, seed: u64) -> String {
    let mut text = String::new();
    let mut x = seed | 1;
    for u in 0..n_u {
        for v in 0..n_v {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            if (x >> 33).is_multiple_of(keep_mod) {
                text.push_str(&format!("{u} {v}\n"));
            }
        }
    }
    text
}

#[test]
fn run_counts_path_graph() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_edges(dir.path(), "path.txt", "0 0\n0 1\n1 1\n");
    let out = mbe(&["run", "--input", &input, "--workers", "2"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "2");
}

#[test]
fn run_on_empty_input_prints_zero() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_edges(dir.path(), "empty.txt", "% nothing\n");
    let out = mbe(&["run", "--input", &input]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0");
}

#[test]
fn missing_file_exits_2() {
    let out = mbe(&["run", "--input", "/nonexistent/file.txt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot open"));
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_edges(dir.path(), "bad.txt", "0 0\nnot numbers\n");
    let out = mbe(&["run", "--input", &input]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn unknown_flag_exits_2() {
    let out = mbe(&["run", "--definitely-not-a-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn enumerate_requires_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_edges(dir.path(), "p.txt", "0 0\n");
    let out = mbe(&["run", "--input", &input, "--mode", "enumerate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn enumerate_output_is_identical_across_configurations() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_edges(dir.path(), "rand.txt", &random_edges(12, 12, 3, 41));
    let mut outputs = Vec::new();
    for (workers, k) in [("1", "1"), ("4", "2"), ("3", "3")] {
        let path = dir.path().join(format!("out-{workers}-{k}.txt"));
        let out = mbe(&[
            "run",
            "--input",
            &input,
            "--mode",
            "enumerate",
            "--output",
            path.to_str().unwrap(),
            "--workers",
            workers,
            "-k",
            k,
        ]);
        assert!(out.status.success());
        outputs.push(fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    assert!(!outputs[0].is_empty());
}

#[test]
fn enumerate_lines_use_original_ids() {
    let dir = tempfile::tempdir().unwrap();
    // One-based complete 2x2 block on labels {7,9} x {5,6}.
    let input = write_edges(dir.path(), "k22.txt", "7 5\n7 6\n9 5\n9 6\n");
    let path = dir.path().join("out.txt");
    let out = mbe(&[
        "run",
        "--input",
        &input,
        "--one-based",
        "--mode",
        "enumerate",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.trim(), "L: 5,6 | R: 7,9");
}

#[test]
fn verify_agrees_on_random_graph() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_edges(dir.path(), "rand.txt", &random_edges(10, 10, 3, 7));
    let out = mbe(&[
        "verify",
        "--input",
        &input,
        "--closure",
        "--reference",
        "--workers",
        "4",
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("verified"));
    assert!(stdout.matches("match").count() >= 2);
}

#[test]
fn verify_guard_exceeded_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_edges(dir.path(), "rand.txt", &random_edges(25, 25, 4, 13));
    let out = mbe(&["verify", "--input", &input, "--closure"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("limit"));
}

#[test]
fn stats_document_has_fixed_fields() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_edges(dir.path(), "rand.txt", &random_edges(10, 10, 2, 3));
    let stats = dir.path().join("stats.json");
    let out = mbe(&[
        "run",
        "--input",
        &input,
        "--workers",
        "2",
        "--stats",
        stats.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&stats).unwrap()).unwrap();
    for field in [
        "dataset", "n_u", "n_v", "edges", "count", "n_workers", "k", "wall_ms", "workers",
        "distribution",
    ] {
        assert!(doc.get(field).is_some(), "missing field {field}");
    }
    assert_eq!(doc["dataset"], "rand");
    assert_eq!(doc["n_workers"], 2);
    let worker = &doc["workers"][0];
    for field in ["id", "phases", "subtrees", "emitted", "stolen"] {
        assert!(worker.get(field).is_some(), "missing worker field {field}");
    }
    for field in ["min", "q1", "median", "q3", "max", "stddev"] {
        assert!(
            doc["distribution"].get(field).is_some(),
            "missing distribution field {field}"
        );
    }
    let count = doc["count"].as_u64().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.trim().parse::<u64>().unwrap(), count);
}

#[test]
fn bench_reports_wall_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_edges(dir.path(), "rand.txt", &random_edges(8, 8, 2, 5));
    let out = mbe(&["bench", "--input", &input, "--repeat", "3", "--workers", "2"]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("3 runs"));
    assert!(stdout.contains("median"));
}
