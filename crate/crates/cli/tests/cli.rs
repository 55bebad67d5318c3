use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kinetic_interface_cli::config::{config_hash, DEFAULT_CONFIG};

const BIN: &str = env!("CARGO_BIN_EXE_iflab");

fn iflab(dir: &Path, workers: usize, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(dir).env("IFLAB_WORKERS", workers.to_string()).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

/// Data rows of a CSV file, skipping the `#` header and the column names.
fn rows(path: &Path) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn shipped_config_validates_and_reports_its_hash() {
    let dir = tempfile::tempdir().unwrap();
    let out = iflab(dir.path(), 1, &["validate", "--out", "v.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("v.json")).unwrap()).unwrap();
    assert_eq!(v["report"]["valid"], true);
    assert_eq!(v["provenance"]["config_sha256"], config_hash(DEFAULT_CONFIG));
    assert!((v["report"]["constants"]["alpha"].as_f64().unwrap() - 1.5).abs() < 1e-12);
}

#[test]
fn bad_alpha_exits_with_2_and_names_the_defect() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", &DEFAULT_CONFIG.replace("exponent = 2.0", "exponent = 0.5"));
    let out = iflab(dir.path(), 1, &["validate", "--config", cfg.to_str().unwrap(), "--out", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("bad.json")).unwrap()).unwrap();
    assert_eq!(v["report"]["failures"][0]["kind"], "AlphaOutOfRange");

    let out = iflab(dir.path(), 1, &["simulate-kinetic", "--config", cfg.to_str().unwrap(), "--out", "k.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("k.csv").exists());
}

#[test]
fn malformed_configs_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [
        ("dup.toml", DEFAULT_CONFIG.replacen("gamma = 1.0", "gamma = 1.0\ngamma = 1.0", 1)),
        ("empty.toml", "[model]\n".to_string()),
        ("range.toml", DEFAULT_CONFIG.replacen("samples = 10000", "samples = 0", 1)),
    ] {
        let cfg = write_config(dir.path(), name, &text);
        let out = iflab(dir.path(), 1, &["validate", "--config", cfg.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("configuration"), "{name}");
    }
}

#[test]
fn exhausted_jump_budget_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = iflab(dir.path(), 1, &["simulate-levy", "--mode", "hatz", "--lambda", "1e10", "--samples", "1", "--out", "h.csv"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn reruns_are_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 3] = [
        &["simulate-kinetic", "--lambda", "1e3", "--samples", "2000", "--seed", "5"],
        &["simulate-levy", "--mode", "zeta", "--samples", "2000", "--seed", "5"],
        &["solve", "--samples", "100", "--t-grid", "0.5:4", "--x-grid", "3:0.5", "--seed", "5"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let mut bytes = Vec::new();
        for workers in [1, 3, 1] {
            let name = format!("run{i}_{workers}_{}.csv", bytes.len());
            let mut full = args.to_vec();
            full.extend(["--out", &name]);
            let out = iflab(dir.path(), workers, &full);
            assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
            bytes.push(std::fs::read(dir.path().join(&name)).unwrap());
        }
        assert_eq!(bytes[0], bytes[1], "{args:?}");
        assert_eq!(bytes[0], bytes[2], "{args:?}");
    }
}

#[test]
fn seed_changes_the_output() {
    let dir = tempfile::tempdir().unwrap();
    for seed in ["1", "2"] {
        let out = iflab(dir.path(), 1, &["simulate-levy", "--mode", "zeta", "--samples", "500", "--seed", seed, "--out", &format!("z{seed}.csv")]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_ne!(rows(&dir.path().join("z1.csv")), rows(&dir.path().join("z2.csv")));
}

#[test]
fn every_file_carries_the_hash_of_its_config_and_is_logged() {
    let dir = tempfile::tempdir().unwrap();
    let text = DEFAULT_CONFIG.replacen("seed = 1", "seed = 9", 1);
    let cfg = write_config(dir.path(), "c.toml", &text);
    let c = cfg.to_str().unwrap();
    let runs: [&[&str]; 4] = [
        &["simulate-kinetic", "--config", c, "--samples", "50", "--out", "a.csv"],
        &["diagnostics", "--config", c, "--symbol-grid", "0.1:1e4:9", "--out", "b.csv"],
        &["forms", "--config", c, "--op", "smseq", "--out", "d.csv"],
        &["forms", "--config", c, "--op", "energy", "--grid", "8:0.015625", "--function", "tent:0:1", "--out", "e.csv"],
    ];
    for args in runs {
        let out = iflab(dir.path(), 2, args);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let header = format!("# config_sha256: {}\n", config_hash(&text));
    for f in ["a.csv", "b.csv", "d.csv", "e.csv"] {
        let body = std::fs::read_to_string(dir.path().join(f)).unwrap();
        assert!(body.starts_with(&header), "{f}");
        assert!(body.contains("# seed: 9\n"), "{f}");
    }
    let log = std::fs::read_to_string(dir.path().join("experiments.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 4);
    for line in log.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["config_sha256"], config_hash(&text));
        assert_eq!(v["params"]["config_path"], c);
    }
    let leftovers: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().starts_with(".tmp"))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn kinetic_csv_has_the_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = iflab(dir.path(), 1, &["simulate-kinetic", "--lambda", "1e3", "--samples", "400", "--out", "k.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("k.csv")).unwrap();
    assert!(text.lines().any(|l| l == "sample_index,position,absorbed,crossings"));
    let r = rows(&dir.path().join("k.csv"));
    assert_eq!(r.len(), 400);
    for (i, row) in r.iter().enumerate() {
        assert_eq!(row[0], i as f64);
        // Absorbed paths sit at the interface; surviving ones never do.
        assert_eq!(row[2] == 1.0, row[1] == 0.0);
    }
}

#[test]
fn compare_on_the_default_config_gives_positive_distances() {
    let dir = tempfile::tempdir().unwrap();
    let out = iflab(
        dir.path(),
        2,
        &[
            "compare",
            "--lambda-grid",
            "1e2,1e3",
            "--samples",
            "300",
            "--blocks",
            "3",
            "--reference-lambda",
            "1e4",
            "--reference-samples",
            "1000",
            "--out",
            "c.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert!(text.lines().any(|l| l == "lambda,ks,wasserstein"));
    let r = rows(&dir.path().join("c.csv"));
    assert_eq!(r.len(), 2);
    for row in r {
        assert!(row[1] > 0.0 && row[1] <= 1.0);
        assert!(row[2] > 0.0);
    }
}

#[test]
fn smseq_matches_the_recurrence() {
    let dir = tempfile::tempdir().unwrap();
    let out = iflab(dir.path(), 1, &["forms", "--op", "smseq", "--p-plus", "0.7", "--m-max", "3", "--out", "s.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let r = rows(&dir.path().join("s.csv"));
    let s: Vec<f64> = r.iter().map(|row| row[1]).collect();
    for (got, want) in s.iter().zip([0.7, 0.58, 0.532]) {
        assert!((got - want).abs() < 1e-15);
    }
}

#[test]
fn hardy_flags_a_nonzero_interface_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = iflab(
        dir.path(),
        1,
        &["forms", "--op", "hardy", "--grid", "4:0.0078125", "--function", "bump:0:1", "--beta", "1.3", "--out", "h.csv"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = rows(&dir.path().join("h.csv"));
    assert_eq!(r[0][2], 1.0);
    // The numerator without its core grows as h halves.
    assert!(r[0][5] > r[0][6]);
}
