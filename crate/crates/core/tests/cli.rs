use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lqts(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lqts"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

const SWEEP: &str = r#"{"model": {"family": "ising", "L": 6},
    "beta": 3.0,
    "sweep": {"param": "h", "grid": {"min": 0.0, "max": 2.0, "count": 9}},
    "subsystems": [1, 2, 3, 6]}"#;

#[test]
fn sweep_csv_is_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sweep.json", SWEEP);
    let out = lqts(&["sweep", "--config", &cfg]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(str::to_owned).collect();
    assert_eq!(
        header,
        [
            "family",
            "L",
            "J",
            "param_name",
            "param_value",
            "beta",
            "n_A",
            "method",
            "lqts_beta",
            "heat_capacity",
            "complement_qfi",
            "dropped_lambda_mass",
            "error"
        ]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 9 * 4);
    for row in &rows {
        assert_eq!(&row[12], "");
        let s: f64 = row[8].parse().unwrap();
        let c: f64 = row[9].parse().unwrap();
        let q: f64 = row[10].parse().unwrap();
        assert!(s >= 0.0 && s <= c + 1e-9);
        assert!((s + q - c).abs() <= 1e-9 * c.max(1e-300));
        if &row[6] == "6" {
            assert!((s - c).abs() <= 1e-10 * c.max(1e-300));
        }
    }
}

#[test]
fn sweep_bytes_do_not_depend_on_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.json",
        r#"{"model": {"family": "xxz", "L": 4}, "beta": 2.0,
            "sweep": {"param": "delta", "grid": {"min": -2.0, "max": 2.0, "count": 9}}}"#,
    );
    let runs: Vec<Vec<u8>> = ["1", "8", "1"]
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let path = dir.path().join(format!("out{i}.csv"));
            let out = lqts(&[
                "sweep",
                "--config",
                &cfg,
                "--workers",
                w,
                "--method",
                "all",
                "--out",
                path.to_str().unwrap(),
            ]);
            assert_eq!(
                out.status.code(),
                Some(0),
                "{}",
                String::from_utf8_lossy(&out.stderr)
            );
            assert!(out.stdout.is_empty());
            fs::read(path).unwrap()
        })
        .collect();
    assert!(!runs[0].is_empty());
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn overrides_replace_job_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sweep.json", SWEEP);
    // Windows longer than the overridden chain are rejected.
    let out = lqts(&["sweep", "--config", &cfg, "--L", "4"]);
    assert_eq!(out.status.code(), Some(2));
    let cfg = write(
        dir.path(),
        "short.json",
        &SWEEP.replace("[1, 2, 3, 6]", "[1, 2, 4]"),
    );
    let out = lqts(&[
        "sweep",
        "--config",
        &cfg,
        "--L",
        "4",
        "--beta",
        "0.5",
        "--grid",
        "0:1:2",
        "--method",
        "eigendiff",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2 * 3);
    for row in &rows {
        assert_eq!(&row[1], "4");
        assert_eq!(&row[5], "0.5");
        assert_eq!(&row[7], "eigendiff");
    }
}

#[test]
fn bad_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"model": {"family": "heisenberg", "L": 4}, "beta": 1.0, "sweep": {"param": "h", "grid": {"min": 0, "max": 1, "count": 3}}}"#,
        r#"{"model": {"family": "ising", "L": 4}, "beta": -1.0, "sweep": {"param": "h", "grid": {"min": 0, "max": 1, "count": 3}}}"#,
        r#"{"model": {"family": "ising", "L": 4}, "beta": 1.0, "sweep": {"param": "h", "grid": {"min": 0, "max": 1, "count": 1}}}"#,
        r#"{"model": {"family": "ising", "L": 4}, "beta": 1.0}"#,
        "not json",
    ];
    for (i, text) in cases.iter().enumerate() {
        let cfg = write(dir.path(), &format!("bad{i}.json"), text);
        let out = lqts(&["sweep", "--config", &cfg]);
        assert_eq!(out.status.code(), Some(2), "case {i}");
        assert!(!out.stderr.is_empty());
    }
    let out = lqts(&[
        "sweep",
        "--config",
        dir.path().join("missing.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = lqts(&["sweep"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oversized_chain_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sweep.json", SWEEP);
    let out = lqts(&["sweep", "--config", &cfg, "--L", "14"]);
    assert_eq!(out.status.code(), Some(4));
    // Purification-based routes are capped well below the exact one.
    let out = lqts(&[
        "sweep",
        "--config",
        &cfg,
        "--L",
        "12",
        "--method",
        "eigendiff",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn lz_report_schema() {
    let dir = tempfile::tempdir().unwrap();
    // Linear crossing |gamma| + 0.05 dips below 2.3994/9.
    let profile: String = (0..=40)
        .map(|k| {
            let g = -1.0 + 0.05 * k as f64;
            format!("{g},{}\n", g.abs() + 0.05)
        })
        .collect();
    write(dir.path(), "v.csv", &profile);
    let cfg = write(
        dir.path(),
        "lz.json",
        r#"{"beta": 9.0, "profile": "v.csv"}"#,
    );
    let out = lqts(&["lz", "--config", &cfg]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["delta_e_star"].as_f64().unwrap() - 0.26660).abs() < 1e-4);
    assert_eq!(v["classification"], "max_min_max");
    let kinds: Vec<&str> = v["extrema"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["kind"].as_str().unwrap())
        .collect();
    assert_eq!(kinds, ["max", "min", "max"]);
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys.len(), 3);

    let wide = write(dir.path(), "wide.csv", "-1,1.5\n0,1.0\n1,1.5\n");
    let cfg = write(
        dir.path(),
        "wide.json",
        &format!(r#"{{"beta": 9.0, "profile": "{wide}"}}"#),
    );
    let out = lqts(&["lz", "--config", &cfg]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["classification"], "single_maximum");
}

#[test]
fn malformed_profile_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "p.csv", "0,1.0\n0.5,0.8\n1.0,oops\n");
    let cfg = write(
        dir.path(),
        "lz.json",
        r#"{"beta": 2.0, "profile": "p.csv"}"#,
    );
    let out = lqts(&["lz", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn few_level_full_count_matches_variance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "few.json",
        r#"{"model": {"family": "ising", "L": 2, "h": 0.7}, "beta": 1.0,
            "sweep": {"param": "h", "grid": {"min": 0.3, "max": 1.3, "count": 3}},
            "k_levels": [1, 2, 4]}"#,
    );
    let out = lqts(&["few-level", "--config", &cfg]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().clone();
    let trunc = header
        .iter()
        .position(|h| h == "truncated_variance")
        .unwrap();
    let full = header.iter().position(|h| h == "full_variance").unwrap();
    let k = header.iter().position(|h| h == "k_levels").unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 9);
    for row in &rows {
        let t: f64 = row[trunc].parse().unwrap();
        let f: f64 = row[full].parse().unwrap();
        match &row[k] {
            "1" => assert_eq!(t, 0.0),
            // Two-site periodic Ising chains have four distinct levels at h != 0.
            "4" => assert!((t - f).abs() <= 1e-12 * f.max(1.0)),
            _ => assert!(t <= f + 1e-12),
        }
    }
}

#[test]
fn scaling_reports_fits_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "scaling.json",
        r#"{"family": "ising", "sizes": [6], "grid": {"min": 0.2, "max": 1.8, "count": 17}, "subsystems": [1, 2, 3]}"#,
    );
    let out = lqts(&["scaling", "--config", &cfg]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let fit = &v.as_array().unwrap()[0];
    assert_eq!(fit["sites"], 6);
    assert_eq!(fit["beta"], 4.5);
    assert!(fit["alpha"].as_f64().unwrap().is_finite());
    assert_eq!(fit["points"].as_array().unwrap().len(), 3);
}
