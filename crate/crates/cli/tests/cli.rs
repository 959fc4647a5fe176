use std::io::Write;
use std::process::Command;

use qdm_cli::{run, Outcome};
use serde_json::Value;

fn qdm(args: &[&str]) -> Outcome {
    run(std::iter::once("qdm").chain(args.iter().copied()))
}

fn json_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn nd_prints_counts() {
    let out = qdm(&["nd", "--dmax", "3"]);
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout, "N1=1 N2=1 N3=12\n");
}

#[test]
fn binary_matches_library() {
    let out = Command::new(env!("CARGO_BIN_EXE_qdm"))
        .args(["nd", "--dmax", "4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "N1=1 N2=1 N3=12 N4=620\n");
    let bad = Command::new(env!("CARGO_BIN_EXE_qdm")).args(["nd"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn flat_rank_one() {
    // d1 + f, d2 + g with f = z2, g = z1.
    let f = json_file(r#"{"vars": ["z1", "z2"], "rank": 1, "derivation": "d", "omega": [[["-z2"]], [["-z1"]]]}"#);
    let out = qdm(&["flat", f.path().to_str().unwrap()]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(out.stdout, "flat\n");
}

#[test]
fn flat_reports_curvature() {
    // d1(-z1) - d2(-z2^2) = 2 z2 - 1.
    let f = json_file(r#"{"vars": ["z1", "z2"], "rank": 1, "derivation": "d", "omega": [[["-z2^2"]], [["-z1"]]]}"#);
    let out = qdm(&["--format", "json", "flat", f.path().to_str().unwrap()]);
    assert_eq!(out.code, 1);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["flat"], false);
    assert_eq!(v["residuals"][0]["entries"][0]["value"], "2*z2 - 1");
}

#[test]
fn malformed_connection_is_usage_error() {
    let f = json_file(r#"{"vars": ["h", "q"], "rank": 2, "omega": [[["q"]]]}"#);
    let out = qdm(&["flat", f.path().to_str().unwrap()]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("not 2x2"));
    assert_eq!(qdm(&["flat", "/nonexistent/conn.json"]).code, 2);
}

#[test]
fn cyclic_from_file_and_space() {
    let f = json_file(r#"{"vars": ["h", "q"], "rank": 2, "omega": [[["0", "q"], ["1", "0"]]]}"#);
    let out = qdm(&["cyclic", f.path().to_str().unwrap()]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.starts_with("operator: D^2 - q\n"));
    let out = qdm(&["cyclic", "--space", "M35"]);
    assert!(out
        .stdout
        .starts_with("operator: D^4 - 27*q*D^2 - 27*h*q*D - 6*h^2*q\n"));
}

#[test]
fn birkhoff_m35_json() {
    let out = qdm(&["--format", "json", "birkhoff", "--space", "m35"]);
    assert_eq!(out.code, 0);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["Q"][0][0][2], "6*q");
    assert_eq!(v["Q"][0][1][3], "21*q");
    assert_eq!(v["Q"][1][0][3], "6*q");
    assert_eq!(v["basis"][3], "D^3 - 21*q*D - 6*h*q");
}

#[test]
fn birkhoff_from_relation_needs_weights() {
    assert_eq!(qdm(&["birkhoff", "--rel", "D^2 - q"]).code, 2);
    let out = qdm(&["birkhoff", "--rel", "D^2 - q", "--weights", "d=0,h=2,q=4"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("basis: 1, D\n"));
}

#[test]
fn birkhoff_p112_is_math_failure() {
    let out = qdm(&["birkhoff", "--space", "P112"]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.starts_with("not normalizable"));
}

#[test]
fn reduce_by_relation_and_file() {
    let out = qdm(&["reduce", "D^3", "--rel", "D^2 - q"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.starts_with("normal form: q*D + h*q\n"));
    let f = json_file(r#"{"relations": ["D^2 - q"]}"#);
    let same = qdm(&["reduce", "D^3", "--presentation", f.path().to_str().unwrap()]);
    assert_eq!(same, out);
    assert_eq!(qdm(&["reduce", "D^3"]).code, 2);
}

#[test]
fn reduce_f2_congruence() {
    let out = qdm(&["--format", "json", "reduce", "D2^2", "--space", "F2"]);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["normal_form"], "2*D1*D2 - q1*q2 + q2");
}

#[test]
fn parse_errors_carry_position() {
    let out = qdm(&["reduce", "D^3 +", "--rel", "D^2 - q"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("byte 5"), "{}", out.stderr);
}

#[test]
fn wdvv_pass_and_tamper() {
    assert_eq!(qdm(&["wdvv", "--dmax", "5"]).code, 0);
    let out = qdm(&["wdvv", "--dmax", "3", "--invariants", "1,2"]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("q^2: violated"));
}

#[test]
fn crepant_passes() {
    let out = qdm(&["crepant"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("16*D^4 - 8*h*D^3 - 4*s^2"));
    assert!(!out.stdout.contains("FAIL"));
}

#[test]
fn extend_kdv() {
    let out = qdm(&["extend", "--T1", "d^2+u", "--P", "(1/2)*u1 - u*d"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.ends_with("u_t = -3*u*u_x - 1/2*u_xxx\n"), "{}", out.stdout);
}

#[test]
fn extend_unclosed_is_math_failure() {
    let out = qdm(&["extend", "--T1", "d^3 + u*d + v", "--P", "d^2"]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("constraint: 0 = -2*u_x"));
}

#[test]
fn lax_reports_commutator() {
    let out = qdm(&[
        "--format",
        "json",
        "lax",
        "--P",
        "d^3 + 3/2*u*d + 3/4*u1",
        "--T1",
        "d^2 + u",
    ]);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["commutator"], "3/2*u*u_x + 1/4*u_xxx");
}

#[test]
fn gate_m35_and_family() {
    let out = qdm(&[
        "gate",
        "D^4 - 27*q*D^2 - 27*h*q*D - 6*h^2*q",
        "--weights",
        "d=0,h=2,q=4",
    ]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("self-adjoint: yes"));
    let out = qdm(&["gate", "D^4 - 27*q*D^2 - alpha*h*q*D - beta*h^2*q"]);
    assert!(out.stdout.contains("fixed: alpha = 27\nfree: beta\n"));
    let out = qdm(&["gate", "D^4 - q*D", "--weights", "d=0,h=2,q=4"]);
    assert_eq!(out.code, 1);
    assert_eq!(qdm(&["gate", "D", "--weights", "d=zero"]).code, 2);
}

#[test]
fn space_json_round_trips_through_flat() {
    let out = qdm(&["--format", "json", "space", "F2"]);
    assert_eq!(out.code, 0);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    let f = json_file(&v["connection"].to_string());
    assert_eq!(qdm(&["flat", f.path().to_str().unwrap()]).code, 0);
    assert_eq!(qdm(&["space", "CP0"]).code, 2);
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["space", "M35"][..],
        &["--format", "json", "birkhoff", "--space", "F2"],
        &["crepant"],
    ] {
        assert_eq!(qdm(args), qdm(args));
    }
}

#[test]
fn help_exits_zero() {
    let out = qdm(&["--help"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("extend"));
}
