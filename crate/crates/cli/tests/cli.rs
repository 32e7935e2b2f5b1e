use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mollikit"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mollikit-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write_1d(path: &Path, n: usize, f: impl Fn(f64) -> f64) {
    let mut s = format!("# dim=1 shape={n} bbox=0,1\n");
    for i in 0..n {
        s += &format!("{}\n", f(i as f64 / (n - 1) as f64));
    }
    std::fs::write(path, s).unwrap();
}

#[test]
fn selftest_is_identical_across_thread_counts() {
    let dir = scratch("selftest");
    let a = dir.join("t1.json");
    let b = dir.join("t8.json");
    let o1 = run(&["--no-timestamp", "--threads", "1", "selftest", "--out", a.to_str().unwrap()]);
    let o8 = run(&["--no-timestamp", "--threads", "8", "selftest", "--out", b.to_str().unwrap()]);
    assert_eq!(o1.status.code(), Some(0), "{}", String::from_utf8_lossy(&o1.stderr));
    assert_eq!(o8.status.code(), Some(0));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn thread_count_from_environment() {
    let out = bin()
        .env("MOLLIKIT_THREADS", "2")
        .args(["--no-timestamp", "norm1", "--probes", "20"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["pass"], Value::Bool(true));
}

#[test]
fn study_writes_one_row_per_n_and_a_table() {
    let dir = scratch("study");
    let out = dir.join("report.json");
    let o = run(&["--no-timestamp", "study", "--fixture", "sin", "--n", "1,2,4,8", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = report(&out);
    assert_eq!(v["report"]["rows"].as_array().unwrap().len(), 4);
    assert!(v.get("generated_unix").is_none());
    let csv = std::fs::read_to_string(dir.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn timestamp_present_by_default() {
    let o = run(&["norm1", "--probes", "10"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["generated_unix"].as_u64().unwrap() > 0);
}

#[test]
fn missing_input_is_a_config_error() {
    let dir = scratch("missing");
    let o = run(&[
        "mollify",
        "--input",
        dir.join("absent.csv").to_str().unwrap(),
        "--eta",
        dir.join("eta.csv").to_str().unwrap(),
        "--out",
        dir.join("tf.csv").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(v["status"], "error");
}

#[test]
fn bad_kernel_json_is_a_config_error() {
    let o = run(&["norm1", "--kernel", "{not json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn eta_then_mollify_round_trip() {
    let dir = scratch("roundtrip");
    let eta = dir.join("eta.csv");
    let o = run(&["--no-timestamp", "eta", "--builder", "regdist", "--epsilon", "0.1", "--out", eta.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let cert: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(cert["report"]["violations"].as_array().unwrap().len(), 0);

    let f = dir.join("f.csv");
    write_1d(&f, 1024, |x| 2.0 - 3.0 * x);
    let tf = dir.join("tf.csv");
    let grad = dir.join("grad.csv");
    let o = run(&[
        "--no-timestamp",
        "mollify",
        "--input",
        f.to_str().unwrap(),
        "--eta",
        eta.to_str().unwrap(),
        "--n",
        "2",
        "--out",
        tf.to_str().unwrap(),
        "--grad",
        grad.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    // affine data is reproduced, and so is its slope
    let vals: Vec<f64> = std::fs::read_to_string(&tf).unwrap().lines().skip(1).map(|l| l.parse().unwrap()).collect();
    for (i, v) in vals.iter().enumerate() {
        let x = i as f64 / 1023.0;
        assert!((v - (2.0 - 3.0 * x)).abs() < 1e-10);
    }
    let g: Vec<f64> = std::fs::read_to_string(&grad).unwrap().lines().skip(1).map(|l| l.parse().unwrap()).collect();
    assert!(g[1..1023].iter().all(|d| (d + 3.0).abs() < 1e-8));
}

#[test]
fn feasible_emits_iterates() {
    let dir = scratch("feasible");
    let alpha = dir.join("alpha.csv");
    let f = dir.join("f.csv");
    write_1d(&alpha, 513, |x| x.min(1.0 - x));
    write_1d(&f, 513, |x| 0.9 * x.min(1.0 - x));
    let out = dir.join("density.json");
    let iters = dir.join("iterates");
    let o = run(&[
        "--no-timestamp",
        "feasible",
        "--f",
        f.to_str().unwrap(),
        "--alpha",
        alpha.to_str().unwrap(),
        "--n",
        "1,4,16",
        "--out",
        out.to_str().unwrap(),
        "--emit-iterates",
        iters.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report(&out)["report"]["rows"].as_array().unwrap().len(), 3);
    for n in [1, 4, 16] {
        assert!(iters.join(format!("iterate_n{n}.csv")).exists());
    }
}

#[test]
fn counterexample_exit_code_follows_its_checks() {
    let dir = scratch("counterexample");
    let out = dir.join("ce.json");
    let o = run(&["--no-timestamp", "counterexample", "--out", out.to_str().unwrap()]);
    let v = report(&out);
    let passed = v["report"]["passed"].as_bool().unwrap();
    assert_eq!(o.status.code(), Some(if passed { 0 } else { 1 }));
    if !passed {
        let err: Value = serde_json::from_slice(&o.stderr).unwrap();
        assert_eq!(err["status"], "assertion_failed");
        assert!(!err["failed"].as_array().unwrap().is_empty());
    }
    assert!(v["report"]["slope"].as_f64().is_some());
}
