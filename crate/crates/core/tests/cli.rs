use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn weakcorr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weakcorr"))
        .args(args)
        .env("WEAKCORR_THREADS", "2")
        .output()
        .expect("spawn weakcorr")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn state_json(args: &[&str]) -> Value {
    let mut full = vec!["state"];
    full.extend_from_slice(args);
    serde_json::from_str(&stdout(&weakcorr(&full))).unwrap()
}

#[test]
fn bd_sweep_csv_is_well_formed_and_reproducible() {
    let args = ["bd-sweep", "--c3-range", "0:1:11", "--x", "1,inf"];
    let first = stdout(&weakcorr(&args));
    let second = stdout(&weakcorr(&args));
    assert_eq!(first, second);

    assert!(first.lines().next().unwrap().starts_with("# "));
    assert!(first.lines().last().unwrap().starts_with("# skipped_invalid="));
    let (header, rows) = parse_csv(&first);
    assert_eq!(header, ["c1", "c2", "c3", "x", "super_discord", "classical_correlation"]);
    assert!(!rows.is_empty());
    for row in &rows {
        assert_eq!(row.len(), header.len());
        for cell in row {
            assert!(!cell.eq_ignore_ascii_case("nan"));
        }
    }
}

#[test]
fn json_output_mirrors_csv() {
    let out = stdout(&weakcorr(&["bd-sweep", "--c3-range", "0:0.5:3", "--x", "2", "--format", "json"]));
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["columns"].as_array().unwrap().len(), 6);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 3);
    assert!(doc["comments"].as_array().unwrap().iter().any(|c| c.as_str().unwrap().starts_with("skipped_invalid=")));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = weakcorr(&["bd-sweep", "--c3-range", "0:0.5:3", "--x", "inf", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(std::fs::read_to_string(&path).unwrap().contains("super_discord"));
}

#[test]
fn bell_state_has_unit_normal_discord() {
    let doc = state_json(&["--bell-diagonal", "1,-1,1", "--x", "inf"]);
    for r in doc["results"].as_array().unwrap() {
        assert!((r["super_discord"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn maximally_mixed_has_no_correlations() {
    let doc = state_json(&["--bell-diagonal", "0,0,0", "--x", "0.5,inf"]);
    let results = doc["results"].as_array().unwrap();
    assert_eq!(results.len(), 4);
    for r in results {
        assert_eq!(r["super_discord"].as_f64().unwrap(), 0.0);
        assert!(r["classical_correlation"].as_f64().unwrap().abs() < 1e-12);
    }
}

#[test]
fn state_output_round_trips_through_matrix_file() {
    let doc = state_json(&["--bell-diagonal", "0.3,-0.2,0.4", "--x", "1.5"]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rho.json");
    std::fs::write(&path, doc["state"].to_string()).unwrap();
    let again = state_json(&["--matrix-file", path.to_str().unwrap(), "--x", "1.5"]);
    assert_eq!(doc["state"], again["state"]);
    assert_eq!(doc["results"], again["results"]);
}

#[test]
fn three_qubit_state_reports_monogamy() {
    let doc = state_json(&["--ghz", "0.25", "--x", "inf"]);
    let reports = doc["monogamy"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    for r in reports {
        assert!(r["score"].as_f64().unwrap() >= -1e-6);
    }
}

fn write_matrix(dir: &Path, scale: f64) -> String {
    let path = dir.join("bad.json");
    let re = [0.5 * scale, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5 * scale];
    let doc = serde_json::json!({ "dims": [2, 2], "re": re, "im": vec![0.0; 16] });
    std::fs::write(&path, doc.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_matrix(dir.path(), 0.9);
    let out = weakcorr(&["state", "--matrix-file", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let good = write_matrix(dir.path(), 1.0);
    assert_eq!(weakcorr(&["state", "--matrix-file", &good]).status.code(), Some(0));

    assert_eq!(weakcorr(&["bd-sweep", "--x", ""]).status.code(), Some(2));
    assert_eq!(weakcorr(&["bd-sweep", "--x", "-1"]).status.code(), Some(2));
    assert_eq!(weakcorr(&["bd-sweep", "--c3-range", "0:1:1"]).status.code(), Some(2));
    assert_eq!(weakcorr(&["ghz-monogamy", "--grid-theta", "2"]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(weakcorr(&["state", "--matrix-file", missing.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn undamped_dynamics_is_constant() {
    let out = stdout(&weakcorr(&["dynamics", "--gamma", "0", "--t-range", "0:3:4"]));
    assert!(out.contains("# t_star=none"));
    let (header, rows) = parse_csv(&out);
    for col in 1..header.len() {
        let first: f64 = rows[0][col].parse().unwrap();
        for row in &rows {
            assert!((row[col].parse::<f64>().unwrap() - first).abs() < 1e-9);
        }
    }
}

#[test]
fn psi_monogamy_lists_both_arrows() {
    let out = stdout(&weakcorr(&["psi-monogamy", "--p-range", "0:1:3", "--epsilon", "1", "--x", "inf"]));
    let (header, rows) = parse_csv(&out);
    assert_eq!(header[2], "direction");
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().any(|r| r[2] == "from") && rows.iter().any(|r| r[2] == "to"));
}
