//! End-to-end tests of the command-line surface: exit codes, file formats
//! and the emit/re-ingest round trip.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mphi_core::algebra::{AlgebraElement, AlgebraSignature};
use mphi_core::spectra::ShiftPolynomial;
use mphi_core::symbolic::{ShiftTerm, SymbolicOperator};

fn mphi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mphi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mphi"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn classify_catalog_member() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("ex1.json");
    let out = mphi(&["construct", "catalog", "ex1", "--signature", "2,1", "--out", file.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out = mphi(&["classify", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["status"], "decided");
    assert_eq!(report["flags"]["in_mphi_plus"], true);
    assert_eq!(report["flags"]["in_mphi"], false);
}

#[test]
fn classify_identity_is_invertible() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("id.json");
    mphi(&["construct", "catalog", "I", "--out", file.to_str().unwrap()]);
    let out = mphi(&["classify", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["flags"]["in_mphi_zero"], true);
    assert_eq!(report["index"], serde_json::json!([0, 0]));
}

#[test]
fn malformed_file_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("junk.json");
    fs::write(&file, "{ not json").unwrap();
    let out = mphi(&["classify", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn undecided_member_exits_two() {
    // identity plus backward shift: colliding invertible coefficients put
    // it outside the decidable family
    let sig = AlgebraSignature::new(vec![2, 1]).unwrap();
    let id = AlgebraElement::identity(&sig);
    let op = SymbolicOperator::new(
        &sig,
        vec![
            ShiftTerm::new(1, 0, 1, 0, 1, id.clone()).unwrap(),
            ShiftTerm::new(1, 0, 1, -1, 2, id).unwrap(),
        ],
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("undecided.json");
    fs::write(&file, serde_json::to_string(&op).unwrap()).unwrap();
    let out = mphi(&["classify", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn index_of_backward_shift() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("l.json");
    mphi(&["construct", "catalog", "L", "--out", file.to_str().unwrap()]);
    let out = mphi(&["index", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["index"], serde_json::json!([2, 1]));
}

#[test]
fn emitted_files_reingest_bit_identically() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["ex1", "ex15", "S", "ex9"] {
        let file = dir.path().join(format!("{name}.json"));
        let out = mphi(&["construct", "catalog", name, "--out", file.to_str().unwrap()]);
        assert!(out.status.success());
        let text = fs::read_to_string(&file).unwrap();
        let parsed: SymbolicOperator = serde_json::from_str(&text).unwrap();
        let re_emitted = serde_json::to_string_pretty(&parsed).unwrap();
        assert_eq!(text, re_emitted, "round trip of {name}");
    }
}

#[test]
fn radii_of_shift_polynomial() {
    let sig = AlgebraSignature::new(vec![2, 1]).unwrap();
    let p = ShiftPolynomial::shift(&sig);
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("shift.json");
    fs::write(&file, serde_json::to_string(&p).unwrap()).unwrap();
    let out = mphi(&["radii", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((value["s"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((value["s_phi"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(value["mode"], "exact");
}

#[test]
fn refine_families_emit_monotone_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["refine", "range17", "--dmax", "16"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines().filter(|l| !l.trim().is_empty());
    assert_eq!(lines.next().unwrap(), "d,margin,angle");
    let margins: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(margins, vec![0.25, 0.125, 0.0625]);

    let out = run_in(dir.path(), &["refine", "sum18", "--dmax", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("d,margin,angle"));
}

#[test]
fn spectrum_sweep_emits_csv() {
    let sig = AlgebraSignature::new(vec![2, 1]).unwrap();
    let two = AlgebraElement::identity(&sig).scale(mphi_core::linalg::C64::new(2.0, 0.0));
    let f = mphi_core::dense::DenseOperator::diagonal(
        &sig,
        &[two.clone(), two, AlgebraElement::zero(&sig)],
    );
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("diag.json");
    fs::write(&file, serde_json::to_string(&f).unwrap()).unwrap();
    let out = mphi(&[
        "spectrum",
        file.to_str().unwrap(),
        "--grid-radius",
        "2.5",
        "--grid-step",
        "0.5",
        "--axes",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("re_c1,im_c1,re_c2,im_c2,invertible,is_eigen,gc_weyl,min_sv"));
    assert!(csv.lines().count() > 10);
}

#[test]
fn verify_single_suite_and_unknown() {
    let out = mphi(&["verify", "atkinson_witness"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let reports: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(reports[0]["suite"], "atkinson_witness");
    assert_eq!(reports[0]["failures"].as_array().unwrap().len(), 0);

    let out = mphi(&["verify", "no_such_suite"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_all_with_small_trials() {
    let out = mphi(&["verify", "all", "--seed", "7", "--trials", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let reports: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 7);
}
