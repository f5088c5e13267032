use std::process::{Command, Output};

use serde_json::Value;

fn sqfib(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqfib")).args(args).output().expect("spawn sqfib")
}

fn json(args: &[&str]) -> Value {
    let out = sqfib(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn spectrum_document_shape() {
    let doc = json(&["spectrum", "--lambda", "5", "--k", "6"]);
    for key in ["command", "config", "result", "caveats", "runtime_ms"] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
    assert_eq!(doc["command"], "spectrum");
    assert!(doc["runtime_ms"].is_null());
    assert_eq!(doc["config"]["k"], 6);
    assert_eq!(doc["result"]["band_count_k"], 13);
    assert_eq!(doc["result"]["band_count_k1"], 21);
    let bands = doc["result"]["sigma_k"].as_array().unwrap();
    assert_eq!(bands.len(), 13);
    for b in bands {
        let pair = b.as_array().unwrap();
        assert!(pair[0].as_f64().unwrap() <= pair[1].as_f64().unwrap());
    }
}

#[test]
fn floats_round_trip_exactly() {
    let doc = json(&["periodic", "--a", "0.25"]);
    let expect = sqfib::periodic::multiplier_p_closed(0.25).unwrap();
    assert_eq!(doc["result"]["p"]["multiplier_closed"].as_f64().unwrap(), expect);
}

#[test]
fn timing_is_opt_in() {
    let doc = json(&["periodic", "--a", "1", "--timing"]);
    assert!(doc["runtime_ms"].as_f64().unwrap() >= 0.0);
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["dim", "--lambda", "4", "--k", "10"];
    let one = sqfib(&[&["--threads", "1"][..], &args[..]].concat());
    let many = sqfib(&[&["--threads", "4"][..], &args[..]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("sqfib-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sum.json");
    let args = ["sum", "--lambda", "3", "--k", "6"];
    let out = sqfib(&[&args[..], &["--output", path.to_str().unwrap()][..]].concat());
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), sqfib(&args).stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn csv_interval_table() {
    let out = sqfib(&["ifs", "--preset", "middle-halves", "--depth", "6", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lo,hi"));
    assert_eq!(lines.count(), 64);
}

#[test]
fn ifs_reports_resonance() {
    let doc = json(&["ifs", "--map", "0.25:0", "--map", "0.5:0.5", "--depth", "8"]);
    assert_eq!(doc["result"]["resonance"]["verdict"], "resonant");
    let doc = json(&["ifs", "--map", "0.3333333333333333:0", "--map", "0.5:0.5", "--depth", "8"]);
    assert_eq!(doc["result"]["resonance"]["verdict"], "non_resonant");
}

#[test]
fn sweep_rows_follow_grid() {
    let doc = json(&["sweep", "--param", "a", "--from", "0", "--to", "4", "--steps", "3", "--run", "periodic"]);
    let rows = doc["result"]["rows"].as_array().unwrap();
    let values: Vec<f64> = rows.iter().map(|r| r["value"].as_f64().unwrap()).collect();
    assert_eq!(values, vec![0.0, 2.0, 4.0]);
    assert_eq!(rows[2]["result"]["lambda"].as_f64().unwrap(), 4.0);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| sqfib(args).status.code().unwrap();
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["spectrum", "--lambda", "0", "--k", "3"]), 1);
    assert_eq!(code(&["spectrum", "--lambda", "nan", "--k", "3"]), 1);
    assert_eq!(code(&["spectrum", "--k", "3"]), 1);
    assert_eq!(code(&["periodic", "--a", "1", "--format", "csv"]), 1);
    assert_eq!(code(&["spectrum", "--lambda", "20", "--k", "18"]), 2);
    assert_eq!(code(&["ifs", "--preset", "middle-thirds", "--depth", "30"]), 3);
    let err = sqfib(&["spectrum", "--lambda", "-2", "--k", "3"]);
    assert!(err.stdout.is_empty());
    assert!(!err.stderr.is_empty());
}
