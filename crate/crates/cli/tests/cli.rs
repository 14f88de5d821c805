use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gbs-page"));
    c.env_remove("GBS_PAGE_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn gbs-page")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn analytic_unsqueezed_is_zero() {
    let o = run(&["analytic", "--alpha", "2", "--s", "0", "--n", "100", "--r-grid", "0:1:0.25"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("r,alpha,s,n,value,per_mode_value,i_max_used,trunc_err,realized_r\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r[4].parse::<f64>().unwrap() == 0.0));
}

#[test]
fn analytic_rows_are_symmetric_and_full_precision() {
    let o = run(&["analytic", "--alpha", "1,3", "--s", "0.5", "--n", "40", "--r-grid", "0:1:0.125"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 18);
    // r-major, alpha-minor; mirror rows carry identical values
    for j in 0..9 {
        for a in 0..2 {
            assert_eq!(rows[2 * j + a][4], rows[2 * (8 - j) + a][4]);
        }
    }
    let v: f64 = rows[8][4].parse().unwrap();
    assert_eq!(rows[8][4], format!("{v:.16e}"));
}

#[test]
fn asymptotic_rows_are_per_mode() {
    let o = run(&["analytic", "--alpha", "2", "--s", "0.5", "--asymptotic", "--r-grid", "0.5:0.5:0.1"]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0][3], "inf");
    assert_eq!(rows[0][4], rows[0][5]);
}

#[test]
fn strong_squeezing_exits_with_guidance() {
    let o = run(&["analytic", "--alpha", "2", "--s", "3", "--n", "400", "--r-grid", "0:1:0.1"]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("limits") && err.contains("simulate"), "{err}");
}

#[test]
fn validation_failures_exit_2() {
    for args in [
        vec!["analytic", "--alpha", "2", "--s", "0.5", "--n", "10", "--r-grid", "0:1"],
        vec!["analytic", "--alpha", "2", "--s", "0.5", "--n", "10", "--r-grid", "0:2:0.5"],
        vec!["analytic", "--alpha", "0", "--s", "0.5", "--n", "10", "--r-grid", "0:1:0.5"],
        vec!["analytic", "--alpha", "2", "--s", "0.5", "--n", "10", "--r-grid", "0:1:0.5", "--tol", "-1"],
        vec!["simulate", "--n", "10", "--k", "11", "--s", "0.5", "--alphas", "2", "--samples", "2"],
        vec!["simulate", "--n", "10", "--k", "3", "--s", "0.5,0.1", "--alphas", "2", "--samples", "2"],
        vec!["limits", "--alpha", "1", "--regime", "medium", "--r-grid", "0:1:0.5"],
        vec!["figure", "fig2"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = bin()
        .args(["simulate", "--n", "4", "--k", "2", "--s", "0.5", "--alphas", "2", "--samples", "2"])
        .env("GBS_PAGE_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn limits_values() {
    let o = run(&["limits", "--alpha", "1", "--regime", "small", "--r-grid", "0:1:0.5"]);
    let rows = csv_rows(&stdout(&o));
    let vals: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(vals, vec![0.0, 0.25, 0.0]);
    assert!(rows.iter().all(|r| r[4] == "s^2 log(1/s^2) n"));

    let o = run(&["limits", "--alpha", "2", "--regime", "large", "--r-grid", "0.25:0.25:0.1"]);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0][3].parse::<f64>().unwrap(), 0.5);
    assert_eq!(rows[0][4], "s n");

    let o = run(&["limits", "--alpha", "3", "--regime", "small", "--r-grid", "0.5:0.5:0.1"]);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0][3].parse::<f64>().unwrap(), 0.375);
    assert_eq!(rows[0][4], "s^2 n");
}

#[test]
fn limits_with_squeezing_vector() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.txt");
    std::fs::write(&p, "0.1, 0.2\n0.2\n").unwrap();
    let o = run(&["limits", "--alpha", "2", "--regime", "small", "--r-grid", "0.5:0.5:0.1", "--s-vector", p.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("r,alpha,regime,value,normalization_label,prediction\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows[0][4], "sum s_i^2");
    let pred: f64 = rows[0][5].parse().unwrap();
    assert!((pred - 0.5 * 0.09).abs() < 1e-15);
    let o = run(&["limits", "--alpha", "1", "--regime", "small", "--r-grid", "0:1:0.5", "--s-vector", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn full_partition_simulation_is_pure() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("pure");
    let o = run(&[
        "simulate", "--n", "10", "--k", "10", "--s", "0.7", "--alphas", "1,2", "--samples", "5", "--seed", "1",
        "--out-prefix", prefix.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let samples = read(&dir.path().join("pure_samples.csv"));
    assert!(samples.starts_with("sample_index,alpha,entropy\n"));
    let rows = csv_rows(&samples);
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r[2].parse::<f64>().unwrap().abs() < 1e-8));
}

#[test]
fn simulation_is_reproducible_and_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let go = |name: &str, threads: &str| {
        let prefix = dir.path().join(name);
        let o = run(&[
            "simulate", "--n", "12", "--r", "0.5", "--s", "0.5", "--alphas", "1,2,3", "--samples", "8", "--seed", "7",
            "--threads", threads, "--moments", "3", "--out-prefix", prefix.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        (read(&dir.path().join(format!("{name}_samples.csv"))), read(&dir.path().join(format!("{name}_moments.csv"))))
    };
    let a = go("a", "1");
    let b = go("b", "1");
    let c = go("c", "3");
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn summary_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("run");
    let o = run(&[
        "simulate", "--n", "8", "--k", "3", "--s", "0.4", "--alphas", "2,5", "--samples", "6", "--seed", "3",
        "--out-prefix", prefix.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let summary_path = dir.path().join("run_summary.json");
    let samples_path = dir.path().join("run_samples.csv");
    let (summary, samples) = (read(&summary_path), read(&samples_path));
    std::fs::remove_file(&samples_path).unwrap();
    let copy = dir.path().join("again.json");
    std::fs::copy(&summary_path, &copy).unwrap();
    let o = run(&["run", "--config", copy.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&summary_path), summary);
    assert_eq!(read(&samples_path), samples);
}

#[test]
fn config_files_are_strict() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(&good, r#"{"command": "limits", "alpha": 2, "regime": "small", "r_grid": "0:1:0.5"}"#).unwrap();
    let o = run(&["run", "--config", good.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(csv_rows(&stdout(&o))[1][3].parse::<f64>().unwrap(), 0.5);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"command": "limits", "alpha": 2, "regime": "small", "r_grid": "0:1:0.5", "extra": 1}"#)
        .unwrap();
    let o = run(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["run", "--config", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn analytic_json_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.json");
    let o = run(&[
        "analytic", "--alpha", "2", "--s", "0.5", "--n", "20", "--r-grid", "0:1:0.5", "--format", "json", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let first = read(&out);
    let v: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    let copy = dir.path().join("copy.json");
    std::fs::copy(&out, &copy).unwrap();
    let o = run(&["run", "--config", copy.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(read(&out), first);
}

#[test]
fn figure_bundle_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig");
    let o = run(&["figure", "fig1", "--scale", "desk", "--seed", "11", "--samples", "2", "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let analytic = csv_rows(&read(&out.join("analytic.csv")));
    assert_eq!(analytic.len(), 19 * 8);
    let simulated = csv_rows(&read(&out.join("simulated.csv")));
    assert_eq!(simulated.len(), 19 * 8);
    let manifest: serde_json::Value = serde_json::from_str(&read(&out.join("manifest.json"))).unwrap();
    assert_eq!(manifest["n"], 100);
    assert_eq!(manifest["mc_points"].as_array().unwrap().len(), 19);
    assert_eq!(manifest["config"]["seed"], 11);
    assert!(read(&out.join("plot.gp")).contains("analytic.csv"));
}

#[test]
fn page_vs_s_skips_out_of_range_series() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pvs");
    let o = run(&["figure", "page-vs-s", "--samples", "2", "--out-dir", out.to_str().unwrap(), "--no-gnuplot"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value = serde_json::from_str(&read(&out.join("manifest.json"))).unwrap();
    assert!(!manifest["analytic_skipped"].as_array().unwrap().is_empty());
    let limits = csv_rows(&read(&out.join("limits.csv")));
    assert!(limits.iter().all(|r| r[1].parse::<f64>().unwrap() == 1.0 && r[2] == "s n"));
    assert!(!out.join("plot.gp").exists());
}
