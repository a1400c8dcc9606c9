use std::path::Path;
use std::process::Command;
use std::time::Instant;

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_two-slit-bohm");

fn run(args: &[&str], config: Option<&Path>) -> (i32, String) {
    let mut cmd = Command::new(BIN);
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    let out = cmd.args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn smoke_run_writes_all_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sym");
    let start = Instant::now();
    let (code, err) = run(&["--pairs", "100", "--seed", "4", "--out-dir", out.to_str().unwrap()], None);
    assert_eq!(code, 0, "{err}");
    assert!(start.elapsed().as_secs_f64() < 5.0);
    for f in ["summary.json", "marginal_hist.csv", "com_hist.csv", "sqm_marginal.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert!(!out.join("trajectories.csv").exists());
    let s = summary(&out);
    assert_eq!(s["seed"], 4);
    assert_eq!(s["report"]["n_completed"], 100);
    assert_eq!(s["report"]["case"], "symmetric_3_1");
    assert!(s["versions"]["two_slit_bohm"].is_string());
    assert!(s["generated_at_unix"].as_u64().unwrap() > 0);
    assert_eq!(s["config"]["scenario"]["sampler"]["n_pairs"], 100);
}

#[test]
fn summary_is_reproducible_apart_from_timestamp() {
    let tmp = tempfile::tempdir().unwrap();
    let mut docs = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "4")] {
        let out = tmp.path().join(name);
        let status = Command::new(BIN)
            .env("RAYON_NUM_THREADS", threads)
            .args(["--case", "selective_3_2", "--pairs", "300", "--seed", "8", "--out-dir"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        let mut s = summary(&out);
        s["generated_at_unix"] = Value::Null;
        s["config"]["output_dir"] = Value::Null;
        docs.push(serde_json::to_string_pretty(&s).unwrap());
        docs.push(std::fs::read_to_string(out.join("marginal_hist.csv")).unwrap());
    }
    assert_eq!(docs[0], docs[2]);
    assert_eq!(docs[1], docs[3]);
}

#[test]
fn csv_values_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let (code, err) = run(&["--pairs", "200", "--out-dir", out.to_str().unwrap()], None);
    assert_eq!(code, 0, "{err}");
    let s = summary(&out);
    let expected: Vec<f64> = s["report"]["sqm_marginal"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let mut reader = csv::Reader::from_path(out.join("sqm_marginal.csv")).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["bin_lower", "bin_upper", "probability"]);
    let mut n = 0;
    for (rec, want) in reader.records().zip(&expected) {
        let rec = rec.unwrap();
        let text = &rec[2];
        let value: f64 = text.parse().unwrap();
        assert_eq!(format!("{value:.16e}"), text);
        assert!((value - want).abs() <= 2.0 * f64::EPSILON * want.abs(), "{value} vs {want}");
        n += 1;
    }
    assert_eq!(n, expected.len());

    let mut reader = csv::Reader::from_path(out.join("marginal_hist.csv")).unwrap();
    let total: u64 = reader.records().map(|r| r.unwrap()[2].parse::<u64>().unwrap()).sum();
    let m = &s["report"]["marginal_histograms"]["y1"];
    assert_eq!(total + m["underflow"].as_u64().unwrap() + m["overflow"].as_u64().unwrap(), 200);
}

#[test]
fn trajectories_are_written_on_request() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    std::fs::write(&cfg, r#"{"n_pairs": 5, "emit_trajectories": true, "trajectory_sample_stride": 10}"#).unwrap();
    let out = tmp.path().join("o");
    let (code, err) = run(&["--out-dir", out.to_str().unwrap()], Some(&cfg));
    assert_eq!(code, 0, "{err}");
    let mut reader = csv::Reader::from_path(out.join("trajectories.csv")).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["pair", "status", "t", "y1", "y2"]);
    let rows: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
    let pairs: std::collections::BTreeSet<_> = rows.iter().map(|r| r[0].to_string()).collect();
    assert_eq!(pairs.len(), 5);
    assert!(rows.iter().any(|r| r[2].parse::<f64>().unwrap() == 0.0));
    assert!(rows.iter().any(|r| r[2].parse::<f64>().unwrap() == 2.0));
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    for text in [r#"{"bogus": 1}"#, r#"{"sigma0": -1}"#, r#"{"Y": 0.5}"#, r#"{"D": 10, "target_st": 3}"#, "not json"] {
        let cfg = tmp.path().join("bad.json");
        std::fs::write(&cfg, text).unwrap();
        let (code, err) = run(&["--out-dir", out.to_str().unwrap()], Some(&cfg));
        assert_eq!(code, 2, "{text}: {err}");
        assert!(err.contains("invalid config"), "{err}");
    }
    let (code, _) = run(&["--config", "/nonexistent/config.json"], None);
    assert_eq!(code, 2);
}

#[test]
fn rejection_budget_breach_exits_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"n_pairs": 20, "integrator": {"method": "rk4_fixed", "dt_initial": 0.001, "max_steps": 10}}"#,
    )
    .unwrap();
    let out = tmp.path().join("o");
    let (code, err) = run(&["--out-dir", out.to_str().unwrap()], Some(&cfg));
    assert_eq!(code, 3, "{err}");
    assert_eq!(summary(&out)["report"]["counts"]["rejected_step_budget"], 20);
}
