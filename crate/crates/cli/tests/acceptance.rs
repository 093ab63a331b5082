//! Determinism and exit-code contract for the shipped configs.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sqfn"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

#[test]
fn acceptance_11_determinism() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &str| {
        let out_dir = dir.path().join(out);
        let status = bin()
            .arg("run")
            .arg(config("verify-all.toml"))
            .arg("--out-dir")
            .arg(&out_dir)
            .status()
            .unwrap();
        assert!(status.success(), "run exited with {status}");
        std::fs::read(out_dir.join("report.csv")).unwrap()
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a, b, "two runs differ");

    let text = String::from_utf8(a).unwrap();
    let mut suites: Vec<&str> = text
        .lines()
        .skip(1)
        .filter_map(|l| l.split(',').next())
        .collect();
    suites.sort_unstable();
    suites.dedup();
    assert!(suites.len() >= 8, "only {} suites reported", suites.len());

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 300, "default suite took {elapsed:?}");
    println!(
        "ACCEPTANCE 11: PASS ({} suites, both runs in {elapsed:?})",
        suites.len()
    );
}

#[test]
fn sharpness_config_emits_sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .arg("run")
        .arg(config("sharpness.toml"))
        .arg("--out-dir")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(dir.path().join("sharpness.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("lambda,measure,bound,ratio"));
    assert_eq!(lines.count(), 4);
    assert!(dir.path().join("sharpness.svg").exists());
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "seed = \"not a number\"\n").unwrap();
    let status = bin().arg("run").arg(&bad).status().unwrap();
    assert_eq!(status.code(), Some(2));

    let unknown = dir.path().join("unknown.toml");
    std::fs::write(&unknown, "seed = 1\nsuites = [\"nonsense\"]\n").unwrap();
    let status = bin().arg("run").arg(&unknown).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn gen_op_weight_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("tree.json");
    let f = dir.path().join("f.json");
    let sf = dir.path().join("sf.json");
    assert!(bin()
        .args(["gen", "tree", "--nadic", "2", "--depth", "4", "--out"])
        .arg(&tree)
        .status()
        .unwrap()
        .success());
    assert!(bin()
        .args(["gen", "fn", "--model", "gaussian-leaves", "--seed", "7", "--tree"])
        .arg(&tree)
        .arg("--out")
        .arg(&f)
        .status()
        .unwrap()
        .success());
    assert!(bin()
        .args(["op", "--op", "square", "--fn"])
        .arg(&f)
        .arg("--out")
        .arg(&sf)
        .status()
        .unwrap()
        .success());
    let out = bin()
        .args(["weight", "--char", "a1", "--fn"])
        .arg(&sf)
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!(v >= 1.0 || v.is_infinite());
}

#[test]
fn function_file_can_reference_tree_by_path() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("tree.json");
    assert!(bin()
        .args(["gen", "tree", "--nadic", "2", "--depth", "2", "--out"])
        .arg(&tree)
        .status()
        .unwrap()
        .success());
    let f = dir.path().join("f.json");
    std::fs::write(&f, r#"{"tree": "tree.json", "values": [1.0, -1.0, 2.0, 0.0]}"#).unwrap();
    let out = bin()
        .args(["op", "--op", "maximal", "--fn"])
        .arg(&f)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn certify_series_reports_constant() {
    let out = bin()
        .args(["certify", "--name", "series"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let value = v["value"].as_f64().unwrap();
    assert!((value - 1.302).abs() < 1e-3, "series constant {value}");
}
