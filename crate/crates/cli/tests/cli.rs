use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hfvp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hfvp")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = hfvp(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn synth(dir: &Path, extra: &[&str]) {
    let dir = s(dir);
    let mut args = vec!["synth", "--out", &dir];
    args.extend_from_slice(extra);
    ok(&args);
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn detect_recovers_synthetic_horizon() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), &["--n", "3", "--seed", "11"]);
    for i in 0..3 {
        let seg = tmp.path().join(format!("scene_{i:04}.segments.txt"));
        let gt = tmp.path().join(format!("scene_{i:04}.gt.json"));
        let out = ok(&["detect", "--segments", &s(&seg), "--gt", &s(&gt), "--ablation", "cnn-full"]);
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        let e = v["horizon_error"].as_f64().unwrap();
        assert!(e < 0.01, "scene {i}: {e}");
        let rows = fs::read_to_string(&seg).unwrap().lines().filter(|l| !l.trim().is_empty()).count();
        assert_eq!(v["assignments"].as_array().unwrap().len(), rows);
    }
}

#[test]
fn detect_writes_result_and_svg() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), &["--n", "1"]);
    let seg = tmp.path().join("scene_0000.segments.txt");
    let gt = tmp.path().join("scene_0000.gt.json");
    let out = tmp.path().join("out");
    ok(&["detect", "--segments", &s(&seg), "--gt", &s(&gt), "--out", &s(&out), "--svg"]);
    let v = read_json(&out.join("scene_0000.result.json"));
    assert_eq!(v["ablation"], "none-full");
    assert!(v["horizon"]["slope_intercept"]["m"].is_number());
    let svg = fs::read_to_string(out.join("scene_0000.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("stroke-dasharray"));
}

#[test]
fn missing_prior_is_a_usage_error_naming_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), &["--n", "1", "--no-priors"]);
    let seg = tmp.path().join("scene_0000.segments.txt");
    let gt = tmp.path().join("scene_0000.gt.json");
    let out = hfvp(&["detect", "--segments", &s(&seg), "--gt", &s(&gt), "--ablation", "cnn-full"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("scene_0000.prior.json"), "{err}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(hfvp(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(hfvp(&["detect"]).status.code(), Some(1));
    let tmp = tempfile::tempdir().unwrap();
    let seg = tmp.path().join("x.segments.txt");
    fs::write(&seg, "0 0 10 10\n").unwrap();
    // no frame size
    assert_eq!(hfvp(&["detect", "--segments", &s(&seg)]).status.code(), Some(1));
    // malformed row
    fs::write(&seg, "0 0 10\n").unwrap();
    assert_eq!(
        hfvp(&["detect", "--segments", &s(&seg), "--width", "64", "--height", "48"]).status.code(),
        Some(1)
    );
    assert_eq!(hfvp(&["synth", "--n", "0", "--out", &s(tmp.path())]).status.code(), Some(1));
    assert_eq!(hfvp(&["--help"]).status.code(), Some(0));
}

#[test]
fn empty_segments_degrade_gracefully() {
    let tmp = tempfile::tempdir().unwrap();
    let seg = tmp.path().join("empty.segments.txt");
    fs::write(&seg, "").unwrap();
    let out = ok(&["detect", "--segments", &s(&seg), "--width", "640", "--height", "480"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["degraded"], true);
    assert!(v["vps"].as_array().unwrap().is_empty());
}

#[test]
fn detect_is_byte_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), &["--n", "1", "--seed", "2"]);
    let seg = s(&tmp.path().join("scene_0000.segments.txt"));
    let args = ["detect", "--segments", &seg, "--width", "640", "--height", "480", "--seed", "9"];
    assert_eq!(ok(&args).stdout, ok(&args).stdout);
}

#[test]
fn synth_is_bit_identical_and_counts_outliers() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        synth(d, &["--n", "4", "--seed", "5", "--outlier-fraction", "0.5"]);
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 12);
    for n in &names {
        assert_eq!(fs::read(a.join(n)).unwrap(), fs::read(b.join(n)).unwrap(), "{n:?}");
    }
    // 2 families + verticals of 32 each, as many outliers again
    let rows = fs::read_to_string(a.join("scene_0000.segments.txt")).unwrap().lines().count();
    assert_eq!(rows, 192);
}

#[test]
fn synth_noise_ladder_writes_sub_suites() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), &["--n", "2", "--noise", "0,0.25,0.5,1"]);
    for l in ["0", "0.25", "0.5", "1"] {
        assert!(tmp.path().join(format!("noise_{l}/scene_0001.gt.json")).exists(), "{l}");
    }
    // same geometry across levels
    let gt0 = fs::read(tmp.path().join("noise_0/scene_0001.gt.json")).unwrap();
    let gt1 = fs::read(tmp.path().join("noise_1/scene_0001.gt.json")).unwrap();
    assert_eq!(gt0, gt1);
}

#[test]
fn bench_reports_failures_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data, &["--n", "5", "--seed", "3"]);
    fs::write(data.join("scene_0002.gt.json"), "{\"width\": 640").unwrap();
    let mut aucs = Vec::new();
    for run in ["r1", "r2"] {
        let out = tmp.path().join(run);
        ok(&["bench", "--dataset", &s(&data), "--ablation", "cnn-full", "--out", &s(&out)]);
        let summary = read_json(&out.join("cnn-full.summary.json"));
        assert_eq!(summary["n"], 4);
        aucs.push(summary["auc"].as_f64().unwrap());
        let failures = fs::read_to_string(out.join("cnn-full.failures.csv")).unwrap();
        assert!(failures.contains("scene_0002"), "{failures}");
        let records = fs::read_to_string(out.join("cnn-full.records.csv")).unwrap();
        assert_eq!(records.lines().count(), 5);
        let hist = fs::read_to_string(out.join("cnn-full.histogram.csv")).unwrap();
        assert_eq!(hist.lines().count(), 513);
    }
    assert_eq!(aucs[0], aucs[1]);
    assert!(aucs[0] > 0.8);
}

#[test]
fn bench_on_empty_dataset_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hfvp(&["bench", "--dataset", &s(tmp.path()), "--out", &s(&tmp.path().join("o"))]);
    assert_eq!(out.status.code(), Some(1));
}
