use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn ratiocross(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ratiocross"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], cwd: &Path) -> Vec<u8> {
    let out = ratiocross(args, cwd);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn code(args: &[&str], cwd: &Path) -> i32 {
    ratiocross(args, cwd).status.code().expect("exit code")
}

fn read(p: impl AsRef<Path>) -> Vec<u8> {
    fs::read(p).unwrap()
}

#[test]
fn simulate_is_reproducible_and_thread_invariant() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let base = [
        "simulate",
        "--n",
        "40",
        "--lambda",
        "0.05",
        "--count",
        "30",
        "--seed",
        "11",
        "--dump-spectra",
    ];
    let mut a = base.to_vec();
    a.extend(["--out", "a", "--threads", "1"]);
    let mut b = base.to_vec();
    b.extend(["--out", "b", "--threads", "4"]);
    ok(&a, d);
    ok(&b, d);
    for f in [
        "ratios.csv",
        "histogram_r.csv",
        "histogram_rtilde.csv",
        "spectra.csv",
        "summary.json",
    ] {
        assert_eq!(read(d.join("a").join(f)), read(d.join("b").join(f)), "{f}");
    }
    let ratios = String::from_utf8(read(d.join("a/ratios.csv"))).unwrap();
    assert!(ratios.contains("# seed: 11\n"));
    assert_eq!(
        ratios.lines().filter(|l| !l.starts_with('#')).count(),
        1 + 30 * 38
    );
    let spectra = String::from_utf8(read(d.join("a/spectra.csv"))).unwrap();
    assert!(spectra.lines().any(|l| l == "realization,index,level"));
    let hist = String::from_utf8(read(d.join("a/histogram_r.csv"))).unwrap();
    assert!(hist.lines().any(|l| l == "bin_lo,bin_hi,density,count"));

    let mut c = base.to_vec();
    c[8] = "12";
    c.extend(["--out", "c"]);
    ok(&c, d);
    assert_ne!(read(d.join("a/ratios.csv")), read(d.join("c/ratios.csv")));
}

#[test]
fn qkr_and_wishart_simulations() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(
        &[
            "simulate",
            "--ensemble",
            "qkr",
            "--n",
            "21",
            "--gamma",
            "0.01",
            "--count",
            "5",
            "--out",
            "q",
        ],
        d,
    );
    let q = String::from_utf8(read(d.join("q/ratios.csv"))).unwrap();
    assert_eq!(
        q.lines().filter(|l| !l.starts_with('#')).count(),
        1 + 5 * 21
    );
    ok(
        &[
            "simulate",
            "--ensemble",
            "qkr",
            "--n",
            "21",
            "--count",
            "5",
            "--no-wrap",
            "--out",
            "q2",
        ],
        d,
    );
    let q2 = String::from_utf8(read(d.join("q2/ratios.csv"))).unwrap();
    assert_eq!(
        q2.lines().filter(|l| !l.starts_with('#')).count(),
        1 + 5 * 19
    );
    ok(
        &[
            "simulate",
            "--ensemble",
            "wishart-crossover",
            "--n",
            "6",
            "--m",
            "9",
            "--alpha",
            "0.5",
            "--count",
            "4",
            "--format",
            "json",
            "--out",
            "w",
        ],
        d,
    );
    let w: serde_json::Value = serde_json::from_slice(&read(d.join("w/ratios.json"))).unwrap();
    assert_eq!(w["results"].as_array().unwrap().len(), 16);
    assert_eq!(w["provenance"]["config"]["m"], 9);
}

#[test]
fn config_file_precedence() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fs::write(
        d.join("cfg.json"),
        r#"{"n": 8, "count": 3, "seed": 4, "alpha": 0.5}"#,
    )
    .unwrap();
    ok(
        &[
            "simulate", "--config", "cfg.json", "--n", "10", "--out", "o",
        ],
        d,
    );
    let s: serde_json::Value = serde_json::from_slice(&read(d.join("o/summary.json"))).unwrap();
    let cfg = &s["provenance"]["config"];
    assert_eq!(cfg["n"], 10);
    assert_eq!(cfg["count"], 3);
    assert_eq!(cfg["seed"], 4);
    assert_eq!(cfg["param"]["alpha"], 0.5);
    assert_eq!(s["results"]["n_ratios"], 3 * 8);

    fs::write(d.join("bad.json"), r#"{"n": 8, "colour": "red"}"#).unwrap();
    assert_eq!(
        code(&["simulate", "--config", "bad.json", "--out", "x"], d),
        2
    );
    fs::write(d.join("typed.json"), r#"{"n": "eight"}"#).unwrap();
    assert_eq!(
        code(&["simulate", "--config", "typed.json", "--out", "x"], d),
        2
    );
    assert!(!d.join("x").exists());
}

#[test]
fn exit_codes_for_bad_input() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert_eq!(code(&["simulate", "--ensemble", "qkr", "--n", "20"], d), 2);
    assert_eq!(code(&["simulate", "--alpha", "1.5"], d), 2);
    assert_eq!(code(&["simulate", "--slice", "bulk:x"], d), 2);
    assert_eq!(code(&["simulate", "--threads", "0"], d), 2);
    assert_eq!(code(&["fit", "--input", "missing.csv"], d), 1);
    assert_eq!(code(&["bogus"], d), 2);
    assert_eq!(
        code(&["analytic-table", "--which", "means", "--alpha", "0.1"], d),
        2
    );
}

#[test]
fn empty_sweep_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fs::write(
        d.join("empty.json"),
        r#"{"ensemble": "gauss-crossover", "points": []}"#,
    )
    .unwrap();
    assert_eq!(
        code(&["scan", "--spec", "empty.json", "--out", "r.json"], d),
        2
    );
    assert!(!d.join("r.json").exists());
    assert_eq!(code(&["scan"], d), 2);
}

#[test]
fn scan_report_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fs::write(
        d.join("sweep.json"),
        r#"{"ensemble": "gauss-crossover", "target_samples": 2000, "seed": 8,
            "grid": {"n": [10, 20], "scaled_param": [0.0, 1.0]}}"#,
    )
    .unwrap();
    ok(
        &[
            "scan",
            "--spec",
            "sweep.json",
            "--out",
            "a.json",
            "--threads",
            "1",
        ],
        d,
    );
    ok(
        &[
            "scan",
            "--spec",
            "sweep.json",
            "--out",
            "b.json",
            "--threads",
            "3",
        ],
        d,
    );
    assert_eq!(read(d.join("a.json")), read(d.join("b.json")));
    let v: serde_json::Value = serde_json::from_slice(&read(d.join("a.json"))).unwrap();
    assert_eq!(v["provenance"]["seed"], 8);
    let rows = v["results"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0]["N"], 10);
    assert!(rows
        .iter()
        .all(|r| r["n_samples"].as_u64().unwrap() >= 2000));
    ok(
        &[
            "scan",
            "--spec",
            "sweep.json",
            "--format",
            "csv",
            "--out",
            "a.csv",
            "--seed",
            "9",
        ],
        d,
    );
    let csv = String::from_utf8(read(d.join("a.csv"))).unwrap();
    assert!(csv.contains("# seed: 9\n"));
    assert!(csv
        .lines()
        .any(|l| l.starts_with("ensemble,N,raw_param,scaled_param,lambda_eff")));
}

#[test]
fn fit_from_ratio_file_and_levels() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(
        &[
            "simulate", "--n", "3", "--count", "20000", "--seed", "2", "--out", "goe",
        ],
        d,
    );
    let out = ok(&["fit", "--input", "goe/ratios.csv"], d);
    let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
    let lam = v["results"][0]["lambda_eff"].as_f64().unwrap();
    assert!(lam < 0.1, "GOE sample fitted to {lam}");
    assert_eq!(out, ok(&["fit", "--input", "goe/ratios.csv"], d));

    let mut levels = String::from("# two spectra\n");
    for k in 0..2 {
        for i in 0..6 {
            levels.push_str(&format!("{}\n", (i * i + k) as f64));
        }
        levels.push('\n');
    }
    fs::write(d.join("levels.txt"), levels).unwrap();
    let out = ok(&["kld", "--levels", "levels.txt", "--format", "csv"], d);
    let text = String::from_utf8(out).unwrap();
    assert!(text.lines().any(|l| l.starts_with("8,")), "{text}");
    assert_eq!(code(&["fit", "--levels", "levels.txt", "--n", "5"], d), 2);
}

#[test]
fn analytic_tables() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let text = String::from_utf8(ok(&["analytic-table", "--grid", "0:3:0.5"], d)).unwrap();
    let rows: Vec<(f64, f64)> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('r'))
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 7);
    for (r, p) in rows {
        let goe = 27.0 / 8.0 * (r * r + r) / (r * r + r + 1.0f64).powf(2.5);
        assert!((p - goe).abs() < 1e-12);
    }
    let lag = String::from_utf8(ok(
        &[
            "analytic-table",
            "--which",
            "laguerre3",
            "--beta",
            "2",
            "--grid",
            "0:200:0.001",
            "--format",
            "csv",
        ],
        d,
    ))
    .unwrap();
    let vals: Vec<f64> = lag
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('r'))
        .map(|l| l.split_once(',').unwrap().1.parse().unwrap())
        .collect();
    // 420 r⁴/r⁸ tail beyond r = 200.
    let tail = 140.0 / 200f64.powi(3);
    let integral: f64 = vals
        .windows(2)
        .map(|w| 0.5 * (w[0] + w[1]) * 0.001)
        .sum::<f64>()
        + tail;
    assert!((integral - 1.0).abs() < 1e-5, "{integral}");
    let kld = ok(&["kld", "--between", "0", "1"], d);
    let v: serde_json::Value = serde_json::from_slice(&kld).unwrap();
    assert!((v["results"][0]["d_r"].as_f64().unwrap() - 0.1091).abs() < 0.003);
}
