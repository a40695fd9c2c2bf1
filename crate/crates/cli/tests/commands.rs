use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use torus_bnf::presets;
use torus_bnf_cli::problem::ProblemFile;
use torus_bnf_cli::{EXIT_RESONANT, EXIT_SCHEMA};

fn problem(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("problems").join(name)
}

fn bnf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bnf")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn compute_pendulum_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bnf(&["compute", s(&problem("pendulum.json")), "--out", s(tmp.path())]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(tmp.path().join("summary.txt")).unwrap();
    assert!(text.contains("0.5"));
    assert!(text.contains("-0.0625"));
    assert!(tmp.path().join("result.json").exists());
}

#[test]
fn resonant_problem_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bnf(&["compute", s(&problem("resonant.json")), "--out", s(tmp.path())]);
    assert_eq!(out.status.code(), Some(EXIT_RESONANT));
}

#[test]
fn schema_and_io_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.json");
    assert_eq!(bnf(&["compute", s(&missing), "--out", s(tmp.path())]).status.code(), Some(EXIT_SCHEMA));

    let junk = tmp.path().join("junk.json");
    fs::write(&junk, r#"{"dim": 1, "omega": [1.0], "extra": 3}"#).unwrap();
    assert_eq!(bnf(&["compute", s(&junk), "--out", s(tmp.path())]).status.code(), Some(EXIT_SCHEMA));

    // B_m is not retained at M >= 8 by default
    let run = tmp.path().join("m8");
    let out = bnf(&["compute", s(&problem("pendulum.json")), "--order", "8", "--out", s(&run)]);
    assert_eq!(out.status.code(), Some(0));
    let diag = bnf(&["diagnose", s(&run.join("result.json")), "--out", s(&run)]);
    assert_eq!(diag.status.code(), Some(EXIT_SCHEMA));

    fs::write(run.join("broken.json"), "{").unwrap();
    let diag = bnf(&["diagnose", s(&run.join("broken.json")), "--out", s(&run)]);
    assert_eq!(diag.status.code(), Some(EXIT_SCHEMA));
}

#[test]
fn diagnose_and_verify_pendulum() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let p = problem("pendulum.json");
    assert_eq!(bnf(&["compute", s(&p), "--order", "5", "--out", s(dir)]).status.code(), Some(0));
    let result = dir.join("result.json");
    assert_eq!(bnf(&["diagnose", s(&result), "--out", s(dir)]).status.code(), Some(0));
    for f in ["profiles_g.csv", "profiles_b.csv", "diagnostics.json"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let out = bnf(&["verify", s(&p), s(&result), "--horizon", "10", "--samples", "16", "--out", s(dir)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let flat = fs::read_to_string(dir.join("flatness.csv")).unwrap();
    assert_eq!(flat.lines().count(), 9);
}

#[test]
fn checks_combinatorics_report() {
    let out = bnf(&["checks", "--suite", "combinatorics"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.to_string().contains("multinomial_identity"));
}

#[test]
fn bundled_pendulums_match_presets() {
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    for (tag, w) in [("1", 1.0), ("phi", golden)] {
        for eps in [0.1, 0.25, 0.5] {
            let file = problem(&format!("pendulum_w{tag}_eps{eps}.json"));
            let spec = ProblemFile::load(&file).unwrap().to_spec().unwrap();
            let preset = presets::pendulum(w, eps);
            assert!((spec.omega.omega()[0] - w).abs() <= 1e-15);
            let (th, r) = ([0.7], [0.01]);
            assert!((spec.coeffs.eval(&th, &r) - preset.coeffs.eval(&th, &r)).abs() <= 1e-18);
        }
    }
    let golden2d = ProblemFile::load(&problem("golden2d.json")).unwrap().to_spec().unwrap();
    let preset = presets::golden2d();
    let (th, r) = ([0.3, 1.9], [0.02, -0.01]);
    assert!((golden2d.coeffs.eval(&th, &r) - preset.coeffs.eval(&th, &r)).abs() <= 1e-17);
}
