use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crystal-strata"))
        .args(args)
        .env("CRYSTAL_STRATA_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn report(args: &[&str]) -> (i32, Value) {
    let out = run(args);
    let json = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().expect("exit code"), json)
}

#[test]
fn supersingular_slopes() {
    let input = corpus("supersingular.json");
    let (code, r) = report(&["slopes", "-i", input.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(r["slopes"], serde_json::json!(["1/2", "1/2"]));
    assert_eq!(r["p_rank"], 0);
    assert_eq!(r["break_points"], serde_json::json!([[0, 0], [2, 1]]));
}

#[test]
fn report_file_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("out.json");
    let svg = dir.path().join("poly.svg");
    let input = corpus("ordinary.json");
    let out = run(&[
        "slopes",
        "-i",
        input.to_str().unwrap(),
        "--report",
        rep.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("p-rank 1"));
    let r: Value = serde_json::from_str(&fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(r["slopes"], serde_json::json!(["0", "1"]));
    assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn non_square_matrix_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"p": 2, "matrix": [[1, 0], [0]]}"#).unwrap();
    let out = run(&["slopes", "-i", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/matrix"));
}

#[test]
fn bad_entry_reports_its_pointer() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"p": 3, "matrix": [[1, 0], [0, "three"]]}"#).unwrap();
    let out = run(&["prank", "-i", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/matrix/1/1"));
}

#[test]
fn crystal_commands() {
    let f4 = corpus("mixed_f4.json");
    let f4 = f4.to_str().unwrap();
    let (code, r) = report(&["prank", "-i", f4]);
    assert_eq!(code, 0);
    assert_eq!(r["agree"], true);
    assert_eq!(r["p_rank"]["fiber_count"], 1);

    let (code, r) = report(&["hodge", "-i", f4]);
    assert_eq!(code, 0);
    assert_eq!(r["hodge"], serde_json::json!([0, 1, 2]));

    let (code, r) = report(&["exterior", "-i", f4, "--a", "2"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["slopes"], serde_json::json!(["3/2", "3/2", "3"]));

    let ss = corpus("supersingular.json");
    let (code, r) = report(&["iterate", "-i", ss.to_str().unwrap(), "--q", "2"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["slopes"], serde_json::json!(["1", "1"]));

    let ord = corpus("ordinary.json");
    let (code, r) = report(&["split", "-i", ord.to_str().unwrap(), "--b", "0"]);
    assert_eq!(code, 0);
    assert_eq!(r["recovers"], true);
    assert_eq!(r["slope_b_part"]["slopes"], serde_json::json!(["0"]));

    let (code, r) = report(&["hom", "-i", ord.to_str().unwrap(), "--b", "1"]);
    assert_eq!(code, 0);
    assert!(r["exponents"].is_array());
}

#[test]
fn as_counts_on_the_legendre_system() {
    let sys = corpus("as_legendre.json");
    let sys = sys.to_str().unwrap();
    let (code, r) = report(&["as-count", "--system", sys, "--point", "t=1", "--stabilize"]);
    assert_eq!(code, 0);
    assert_eq!(r["count"], "2");
    let (_, r) = report(&["as-count", "--system", sys, "--point", "t=0", "--stabilize"]);
    assert_eq!(r["count"], "1");
    let (_, r) = report(&["as-count", "--system", sys, "--point", "t=1", "--level", "2"]);
    assert_eq!(r["count"], "2");
    let out = run(&["as-count", "--system", sys, "--point", "t=5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stratify_is_independent_of_thread_count() {
    let fam = corpus("legendre.json");
    let args = ["stratify", "--family", fam.to_str().unwrap(), "--max-m", "5", "--strata", "prank,newton,break:1,0,as"];
    let one = run(&args);
    let many =
        Command::new(env!("CARGO_BIN_EXE_crystal-strata")).args(args).arg("--threads").arg("3").output().unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, many.stdout);
    let r: Value = serde_json::from_slice(&one.stdout).unwrap();
    assert_eq!(r["strata"]["prank:0"]["counts"]["5"], 1);
    assert_eq!(r["strata"]["break:1,0"]["counts"]["5"], 31);
}

#[test]
fn purity_passes_on_legendre() {
    let fam = corpus("legendre.json");
    let (code, r) = report(&["purity", "--family", fam.to_str().unwrap(), "--target", "newton:0,1", "--max-m", "6"]);
    assert_eq!(code, 0);
    assert_eq!(r["pass"], true);
}

#[test]
fn verify_selected_suites() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("verify.json");
    let out =
        run(&["verify", "--suite", "exterior-breaks,break-locus", "--seed", "3", "--json", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["pass"], true);
    assert_eq!(r["suites"].as_array().unwrap().len(), 2);
    assert_eq!(run(&["verify", "--suite", "nonsense"]).status.code(), Some(2));
    let (code, r) = report(&["verify", "--suite", "list"]);
    assert_eq!(code, 0);
    assert_eq!(r["suites"].as_array().unwrap().len(), 12);
}
