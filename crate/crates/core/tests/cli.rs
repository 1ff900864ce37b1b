use std::path::Path;
use std::process::{Command, Output};

use zicount::cli::{check_round_trip, read_fit_report, SCHEMA_VERSION};
use zicount::trajan;

fn zicount(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zicount"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stderr_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|_| panic!("stderr is not JSON: {}", String::from_utf8_lossy(&o.stderr)))
}

#[test]
fn fit_writes_report_that_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = zicount(&["fit", "--trajan", "--zi", "d"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_fit_report(dir.path().join("fit.json")).unwrap();
    assert_eq!(report.schema_version, SCHEMA_VERSION);
    assert_eq!(report.n, 270);
    assert_eq!(report.cells.len(), 8);
    assert!(check_round_trip(&report, &trajan()).unwrap() < 1e-9);
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["schema_version"], SCHEMA_VERSION);
    assert!(manifest["argv"].is_array());
}

#[test]
fn fit_from_csv_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    std::fs::write(&input, "count,g\n0,a\n1,a\n3,b\n0,b\n2,a\n5,b\n0,a\n4,b\n").unwrap();
    let o = zicount(
        &["fit", "--input", input.to_str().unwrap(), "--response", "count", "--cell", "g", "--zi", "a"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("fit.json").exists());
}

#[test]
fn simulate_is_byte_identical_for_a_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["simulate", "--zi", "b", "--base", "nbquad", "--params", "0.7,-0.4,-1", "--n", "300", "--seed", "42"];
    assert_eq!(zicount(&args, a.path()).status.code(), Some(0));
    assert_eq!(zicount(&args, b.path()).status.code(), Some(0));
    let x = std::fs::read(a.path().join("simulated.csv")).unwrap();
    let y = std::fs::read(b.path().join("simulated.csv")).unwrap();
    assert_eq!(x, y);
    assert_eq!(String::from_utf8(x).unwrap().lines().count(), 301);
}

#[test]
fn curves_writes_svg_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = zicount(&["curves", "--point", "0.2,0.4", "--grid-points", "64"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("curves.svg").exists());
    let csvs = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("curve_"))
        .count();
    assert_eq!(csvs, 6);
}

#[test]
fn diagnose_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = zicount(&["diagnose", "--trajan", "--bins", "4"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["zero_diagnostic.csv", "cells.csv", "diagnose.json", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn unknown_zi_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = zicount(&["fit", "--trajan", "--zi", "e"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_json(&o)["error"].is_string());
}

#[test]
fn missing_input_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = zicount(&["fit", "--input", "/nonexistent/data.csv", "--response", "y"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr_json(&o)["error"].is_string());
}

#[test]
fn wrong_parameter_count_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = zicount(&["simulate", "--zi", "d", "--params", "0.5"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn trajan_repro_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = zicount(&["trajan-repro"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["report.json", "means.svg", "zeros.svg", "fitted_curves.svg", "aic.csv", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}
