use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use discofield_cli::registry::is_registered;

fn discofield(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_discofield"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("DISCOFIELD_OUT")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn report(dir: &Path, cmd: &str) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join(format!("{cmd}.report.json"))).unwrap())
        .unwrap()
}

#[test]
fn verify_algebra_emits_ten_passing_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let out = discofield(&["verify-algebra"], tmp.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(tmp.path().join("verify-algebra.checks.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("check_id,eq_ref,value,tolerance,pass"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
    let rel = fs::read_to_string(tmp.path().join("verify-algebra.relations.csv")).unwrap();
    assert!(rel.starts_with("relation_id,eq_ref,max_abs_residual,pass\n"));
    assert_eq!(rel.lines().count(), 11);
}

#[test]
fn resonance_csv_lists_the_ground_tuple() {
    let tmp = tempfile::tempdir().unwrap();
    let out = discofield(&["resonance"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(tmp.path().join("resonance.tuples.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("0,0,0,0,0,")), "{csv}");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for cmd in ["verify-hermite", "scalar-residual", "baselines"] {
        discofield(&[cmd, "--seed", "7"], a.path());
        discofield(&[cmd, "--seed", "7"], b.path());
        for ext in ["report.json", "checks.csv"] {
            let name = format!("{cmd}.{ext}");
            assert_eq!(
                fs::read(a.path().join(&name)).unwrap(),
                fs::read(b.path().join(&name)).unwrap(),
                "{name}"
            );
        }
    }
    assert_eq!(report(a.path(), "baselines")["seed"], 7);
}

#[test]
fn different_seeds_change_sampled_suites() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    discofield(&["baselines", "--seed", "1"], a.path());
    discofield(&["baselines", "--seed", "2"], b.path());
    assert_ne!(
        fs::read(a.path().join("baselines.momenta.csv")).unwrap(),
        fs::read(b.path().join("baselines.momenta.csv")).unwrap()
    );
}

#[test]
fn minimal_config_completes_p0() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"B": {"diag": [4, 1, 1, 1]}, "M": 1, "dm": 1, "Pvec": [0, 0, 0]}"#,
    );
    let out = discofield(&["verify-algebra", "--config", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let r = report(tmp.path(), "verify-algebra");
    assert_eq!(r["config"]["P"][0].as_f64(), Some(1.0));
    assert_eq!(r["config"]["P0_completed"], true);
}

#[test]
fn unknown_key_is_rejected_by_name() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"M": 1, "foo": 3}"#);
    let out = discofield(&["verify-algebra", "--config", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown keys") && err.contains("foo"), "{err}");
}

#[test]
fn negative_diagonal_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"B": {"diag": [4, -1, 1, 1]}}"#);
    let out = discofield(&["verify-algebra", "--config", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("strictly positive"));
}

#[test]
fn malformed_json_reports_position() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "{\n  \"M\": 1,\n  \"dm\": \n}");
    let out = discofield(&["verify-algebra", "--config", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));
}

#[test]
fn check_failures_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = discofield(&["spectrum-1d", "--tolerance-scale", "1e-12"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let csv = fs::read_to_string(tmp.path().join("spectrum-1d.checks.csv")).unwrap();
    assert!(csv
        .lines()
        .any(|l| l.starts_with("grid-lowest-six,") && l.ends_with(",false")));
}

#[test]
fn computation_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"B": [[2, 0.3, 0, 0], [0.3, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]}"#,
    );
    let out = discofield(&["resonance", "--config", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let r = report(tmp.path(), "resonance");
    assert!(!r["summary"]["errors"].as_array().unwrap().is_empty());
    let rows = r["checks"].as_array().unwrap();
    assert!(rows
        .iter()
        .any(|c| c["pass"] == false && c["value"].is_null()));
}

#[test]
fn cutoff_cap_is_enforced() {
    let tmp = tempfile::tempdir().unwrap();
    let out = discofield(&["factorization", "--cutoff-cap", "100"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_dir_falls_back_to_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_discofield"))
        .arg("verify-algebra")
        .env("DISCOFIELD_OUT", tmp.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(tmp.path().join("verify-algebra.report.json").exists());
}

#[test]
fn emitted_eq_refs_are_registered() {
    let tmp = tempfile::tempdir().unwrap();
    for cmd in [
        "verify-hermite",
        "spectrum-1d",
        "constraint",
        "resonance",
        "baselines",
    ] {
        discofield(&[cmd, "--exponent-variant", "literal"], tmp.path());
        for c in report(tmp.path(), cmd)["checks"].as_array().unwrap() {
            let tag = c["eq_ref"].as_str().unwrap();
            assert!(is_registered(tag), "{cmd}: {tag}");
        }
    }
    let r = report(tmp.path(), "verify-hermite");
    assert!(r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["id"] == "exponent-literal-norm-n0"));
}
