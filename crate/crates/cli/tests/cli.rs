//! End-to-end tests of the `nil2` binary: exit codes, report determinism,
//! and the shipped example files.

use std::path::PathBuf;
use std::process::{Command, Output};

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nil2"))
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nil2-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn check_accepts_the_shipped_algebra() {
    let out = binary()
        .args(["check", &fixture("a_alg.json")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let stdout = stdout_of(&out);
    assert!(stdout.contains("PASS class_k"), "{stdout}");
    assert!(stdout.contains("delta 3"), "{stdout}");
}

#[test]
fn check_rejects_a_commuting_pair_but_exits_clean() {
    // A negative verdict is a successful determination: the failure lands in
    // the report, not in the exit code.
    let out = binary()
        .args(["check", &fixture("commuting_pair.json")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let stdout = stdout_of(&out);
    assert!(stdout.contains("FAIL class_k"), "{stdout}");
}

#[test]
fn missing_file_exits_with_the_parse_code() {
    let out = binary()
        .args(["check", "no-such-file.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("cannot read"));
}

#[test]
fn malformed_json_reports_line_and_column() {
    let path = scratch("malformed.json");
    std::fs::write(&path, "{\n  \"p\": 3,\n  \"dim\": oops\n}\n").unwrap();
    let out = binary()
        .args(["check", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = stderr_of(&out);
    assert!(stderr.contains("line 3"), "{stderr}");
    assert!(stderr.contains("column"), "{stderr}");
}

#[test]
fn modulus_mismatch_exits_with_the_precondition_code() {
    let out = binary()
        .args(["check", &fixture("a_alg.json"), "--p", "5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_of(&out).contains("modulus 3"));
}

#[test]
fn bad_span_exits_with_the_parse_code() {
    let out = binary()
        .args(["check", &fixture("a_alg.json"), "--span", "1,x,0,0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("bad span"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let r1 = scratch("report1.json");
    let r2 = scratch("report2.json");
    for path in [&r1, &r2] {
        let out = binary()
            .args([
                "check",
                &fixture("a_alg.json"),
                "--span",
                "1,0,0,0;0,1,0,0",
                "--report",
                path.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    }
    let a = std::fs::read(&r1).unwrap();
    let b = std::fs::read(&r2).unwrap();
    assert_eq!(a, b, "report bytes differ between identical runs");
    let text = String::from_utf8(a).unwrap();
    assert!(text.contains("\"schema_version\": 1"), "{text}");
    assert!(text.contains("\"class_k\""), "{text}");
    assert!(text.ends_with('\n'));
}

#[test]
fn extend_reports_the_algebraic_route_on_the_worked_problem() {
    let out = binary()
        .args([
            "extend",
            &fixture("worked_script.json"),
            &fixture("worked_problem.json"),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let stdout = stdout_of(&out);
    assert!(stdout.contains("case-a(algebraic)"), "{stdout}");
    assert!(stdout.contains("PASS derivation_valid"), "{stdout}");
    assert!(stdout.contains("PASS domain_contains_requested"), "{stdout}");
}

#[test]
fn extend_grows_the_workspace_on_the_transcendental_problem() {
    let out = binary()
        .args([
            "extend",
            &fixture("free4_script.json"),
            &fixture("transcendental_problem.json"),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let stdout = stdout_of(&out);
    assert!(stdout.contains("amalgam-embed(transcendental)"), "{stdout}");
    assert!(stdout.contains("ambient dimension 5"), "{stdout}");
}

#[test]
fn extend_needs_no_steps_on_the_trivial_problem() {
    let out = binary()
        .args([
            "extend",
            &fixture("worked_script.json"),
            &fixture("trivial_problem.json"),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    assert!(stdout_of(&out).contains("no steps needed"));
}

#[test]
fn cover_runs_the_shipped_experiments() {
    let out = binary()
        .args([
            "cover",
            &fixture("cover_script.json"),
            &fixture("cover_experiment.json"),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let stdout = stdout_of(&out);
    assert!(stdout.contains("PASS exp1_orbit_distinct"), "{stdout}");
    assert!(
        stdout.contains("PASS exp2_stabilizer_scan"),
        "{stdout}"
    );
    assert!(stdout.contains("5 checks: 5 passed"), "{stdout}");
}
