use std::path::Path;
use std::process::Command;

use sasaki_cli::report::CSV_COLUMNS;

fn sasaki(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_sasaki")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn verify_passes_and_reports_sixteen_fifths() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = sasaki(&["verify", "--out", out, "--samples", "500"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("c(3;1) exact") && stdout.contains("c = 16/5"), "{stdout}");
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    let m3 = json["details"]["coefficients"].as_array().unwrap().iter().find(|c| c["m"] == 3).unwrap();
    assert_eq!(m3["c_m1"], "16/5");
    assert_eq!(json["config_hash"].as_str().unwrap().len(), 64);
    assert!(json["build_id"].as_str().unwrap().starts_with('v'));
}

#[test]
fn csv_has_fixed_columns_and_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = sasaki(&["comass", "--out", out, "--samples", "2000", "--seed", "9"]);
    assert!(run.status.success());
    let mut reader = csv::Reader::from_path(dir.path().join("comass.csv")).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, CSV_COLUMNS);
    for rec in reader.records() {
        let rec = rec.unwrap();
        assert_eq!(&rec[0], "comass");
        assert_eq!(&rec[10], "9");
        assert_eq!(rec[12].len(), 64);
    }
}

#[test]
fn same_config_reproduces_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "rec.json",
        r#"{"experiment": "recovery", "r_k": [1e-2, 3e-3], "samples": {"per_stratum": 2000}, "seed": 5}"#,
    );
    let mut files = Vec::new();
    for tag in ["a", "b"] {
        let out = dir.path().join(tag);
        let run = sasaki(&["recovery", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(run.status.code().is_some_and(|c| c <= 1), "{}", String::from_utf8_lossy(&run.stderr));
        files.push(std::fs::read_to_string(out.join("recovery.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert!(files[0].lines().count() > 10);
}

#[test]
fn fault_injection_fails_with_status_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for (cmd, fault) in [("verify", "c2"), ("verify", "vartheta"), ("verify", "cutoff-eps"), ("comass", "c2")] {
        let run = sasaki(&[cmd, "--out", out, "--samples", "500", "--fault-inject", fault]);
        assert_eq!(run.status.code(), Some(1), "{cmd} with {fault}");
        assert!(String::from_utf8_lossy(&run.stdout).contains("[FAIL]"));
    }
}

#[test]
fn bad_inputs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let unknown = sasaki(&["verify", "--out", out, "--fault-inject", "nope"]);
    assert!(!unknown.status.success());
    let cfg = write_config(dir.path(), "c.json", r#"{"experiment": "comass"}"#);
    let mismatch = sasaki(&["verify", "--config", &cfg, "--out", out]);
    assert_eq!(mismatch.status.code(), Some(2));
    let cfg = write_config(dir.path(), "d.json", r#"{"experiment": "recovery", "r_k": [1e-3, 1e-2]}"#);
    let ascending = sasaki(&["recovery", "--config", &cfg, "--out", out]);
    assert_eq!(ascending.status.code(), Some(2));
}
