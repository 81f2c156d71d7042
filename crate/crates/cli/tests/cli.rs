use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn expu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_expu"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn bsc(dir: &Path) -> PathBuf {
    let path = dir.join("bsc.json");
    std::fs::write(
        &path,
        r#"{"inputs": 2, "outputs": 2, "matrix": [[0.9, 0.1], [0.1, 0.9]]}"#,
    )
    .unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn exponents_table() {
    let tmp = tempfile::tempdir().unwrap();
    let ch = bsc(tmp.path());
    let o = expu(&[
        "exponents",
        "--channel",
        ch.to_str().unwrap(),
        "--rates",
        "0.01:0.05:0.02",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "rate,rho_star_rc,e_r,rho_hat,e_ex,capped");
    assert_eq!(lines.len(), 4);
    let last: Vec<&str> = lines[3].split(',').collect();
    assert_eq!(last[0], "0.05");
    assert_eq!(last[3], "1");
    assert!((last[4].parse::<f64>().unwrap() - 0.271928).abs() < 1e-6);
}

#[test]
fn bad_channel_reports_location() {
    let tmp = tempfile::tempdir().unwrap();
    let ch = tmp.path().join("bad.json");
    std::fs::write(
        &ch,
        r#"{"inputs": 2, "outputs": 2, "matrix": [[0.9, 0.1], [0.1, -0.9]]}"#,
    )
    .unwrap();
    let o = expu(&[
        "exponents",
        "--channel",
        ch.to_str().unwrap(),
        "--rates",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("row 1"), "{err}");
}

#[test]
fn sample_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let ch = bsc(tmp.path());
    let args = [
        "sample",
        "--channel",
        ch.to_str().unwrap(),
        "--rate",
        "0.5",
        "--n",
        "6",
        "--eps",
        "0.5",
        "--kind",
        "cc",
        "--seed",
        "9",
        "--trial",
        "2",
    ];
    let a = expu(&args);
    let b = expu(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 12);
    for r in rows {
        assert_eq!(
            r.as_array()
                .unwrap()
                .iter()
                .filter(|s| s.as_u64() == Some(1))
                .count(),
            3
        );
    }
}

#[test]
fn trial_reports_reference_sizes() {
    let tmp = tempfile::tempdir().unwrap();
    let ch = bsc(tmp.path());
    let o = expu(&[
        "trial",
        "--channel",
        ch.to_str().unwrap(),
        "--rate",
        "0.05",
        "--n",
        "120",
        "--seed",
        "4",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["m_n"], 64);
    assert_eq!(v["m_prime"], 71);
    assert_eq!(v["census"]["required"], 68);
    assert_eq!(v["codewords"].as_array().unwrap().len(), 71);
}

#[test]
fn exact_check_ratio_at_most_one() {
    let tmp = tempfile::tempdir().unwrap();
    let ch = bsc(tmp.path());
    let o = expu(&[
        "exact-check",
        "--channel",
        ch.to_str().unwrap(),
        "--rate",
        "0.2",
        "--n",
        "8",
        "--eps",
        "0.5",
        "--eps1",
        "0.25",
        "--trials",
        "4",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let r = v["max_ratio"].as_f64().unwrap();
    assert!(r > 0.0 && r <= 1.0 + 1e-12);
    assert_eq!(v["trials"].as_array().unwrap().len(), 4);
}

fn run_experiment(cfg: &Path, out: &Path, threads: &str) -> (Output, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_expu"))
        .args([
            "experiment",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .env("EXPU_THREADS", threads)
        .output()
        .unwrap();
    let dir = PathBuf::from(stdout(&o).trim());
    let csv = std::fs::read_to_string(dir.join("results.csv")).unwrap_or_default();
    (o, csv)
}

#[test]
fn experiment_output_independent_of_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    bsc(tmp.path());
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"channel_path": "bsc.json", "q": [0.5, 0.5], "rate": 0.05, "eps": 0.1,
            "eps1": 0.05, "n_grid": [40, 80], "trials": 30, "master_seed": 7}"#,
    )
    .unwrap();
    let out = tmp.path().join("runs");
    let (a, csv1) = run_experiment(&cfg, &out, "1");
    let (b, csv8) = run_experiment(&cfg, &out, "8");
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    assert_eq!(b.status.code(), Some(0));
    assert!(!csv1.is_empty());
    assert_eq!(csv1, csv8);
    assert_eq!(std::fs::read_dir(&out).unwrap().count(), 2);
}

#[test]
fn experiment_flags_and_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let ch = bsc(tmp.path());
    let out = tmp.path().join("runs");
    let o = expu(&[
        "experiment",
        "--channel",
        ch.to_str().unwrap(),
        "--rate",
        "0.05",
        "--n-grid",
        "40",
        "--trials",
        "20",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let dir = PathBuf::from(stdout(&o).trim());
    for f in ["config.json", "results.csv", "summary.json"] {
        assert!(dir.join(f).is_file(), "{f}");
    }

    let o = expu(&[
        "experiment",
        "--channel",
        ch.to_str().unwrap(),
        "--rate",
        "0.05",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = expu(&[
        "experiment",
        "--channel",
        ch.to_str().unwrap(),
        "--rate",
        "0.05",
        "--n-grid",
        "40",
        "--trials",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_contract_exits_one() {
    // The nominal rate ignores the 16-fold mother code, so the threshold
    // sits far above what the competitors allow.
    let tmp = tempfile::tempdir().unwrap();
    let ch = bsc(tmp.path());
    let out = tmp.path().join("runs");
    let o = expu(&[
        "experiment",
        "--channel",
        ch.to_str().unwrap(),
        "--rate",
        "0.05",
        "--n-grid",
        "20",
        "--trials",
        "20",
        "--eps",
        "15",
        "--eps1",
        "0.5",
        "--gamma",
        "const:8",
        "--rate-convention",
        "nominal",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL lemma_rate n=20"));
}
