use std::fs;
use std::io::Write;
use std::process::{Command, Output, Stdio};

use mdcrt_cli::{execute, Cli};
use clap::Parser;
use serde_json::{json, Value};

fn mdcrt(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_mdcrt"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap()
}

fn run_doc(args: &[&str], input: Value) -> mdcrt_cli::Output {
    let mut argv = vec!["mdcrt"];
    argv.extend(args);
    let cli = Cli::parse_from(argv);
    execute(&cli.command, &input, None).unwrap()
}

fn json_of(out: mdcrt_cli::Output) -> Value {
    match out {
        mdcrt_cli::Output::Json(v) => v,
        mdcrt_cli::Output::Csv(_) => panic!("expected JSON"),
    }
}

#[test]
fn reads_stdin_and_exits_zero() {
    let out = mdcrt(&["fpd"], r#"{"matrix": [[1, 0], [0, 1]]}"#);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "{\"points\":[[0,0]],\"size\":1}\n");
}

#[test]
fn ragged_matrix_is_a_schema_error() {
    let out = mdcrt(&["lcrm"], r#"{"moduli": [[[1, 2], [3]]]}"#);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_json(&out);
    assert_eq!(err["error"]["kind"], "SchemaError");
    assert_eq!(err["error"]["pointer"], "/moduli/0/1");
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_and_unknown_input() {
    assert_eq!(mdcrt(&["lcrm"], "{").status.code(), Some(2));
    let out = mdcrt(&["bound"], r#"{"gamma": 4, "rho": 2, "eta": 2}"#);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["pointer"], "/eta");
    let out = mdcrt(&["rem"], r#"{"matrix": [[3, 0], [1, 3]], "vector": [1, 2, 3]}"#);
    assert_eq!(stderr_json(&out)["error"]["pointer"], "/vector");
    let out = mdcrt(&["solve-multi"], r#"{"moduli": [[[3]]], "sets": [[[1]]]}"#);
    assert_eq!(stderr_json(&out)["error"]["pointer"], "/rho");
}

#[test]
fn domain_errors_exit_one() {
    let out = mdcrt(
        &["crt"],
        r#"{"congruences": [{"modulus": [[2]], "residue": [0]}, {"modulus": [[4]], "residue": [1]}]}"#,
    );
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_json(&out);
    assert_eq!(err["error"]["kind"], "NoSolution");
    assert!(err["error"]["message"].as_str().unwrap().contains("no solution"));

    let out = mdcrt(&["solve-pair"], r#"{"moduli": [[[3]], [[4]]], "sets": [[[1]], [[1]]]}"#);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"]["kind"], "NoCommonDifference");
}

#[test]
fn library_input_errors_exit_two() {
    let out = mdcrt(&["rem"], r#"{"matrix": [[1, 2], [2, 4]], "vector": [1, 1]}"#);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"]["kind"], "SingularMatrix");
    let out = mdcrt(&["crt"], r#"{"congruences": [{"modulus": [[3]], "residue": [5]}]}"#);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["kind"], "InvalidInput");
}

#[test]
fn writes_to_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = mdcrt(&["bound", "--out", path.to_str().unwrap()], r#"{"gamma": 6, "rho": 3}"#);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["bound"], json!(multivec_bound(6, 3)));
}

fn multivec_bound(g: usize, r: usize) -> u64 {
    mdcrt::multivec::crt_invocation_bound(g, r) as u64
}

#[test]
fn fpd_csv() {
    let out = mdcrt(&["fpd", "--csv"], r#"{"matrix": [[2, 0], [1, 2]]}"#);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,x2"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn big_integers_are_strings_past_53_bits() {
    let doc = json_of(run_doc(&["lcrm"], json!({"moduli": [[["9007199254740993"]], [[2]]]})));
    assert_eq!(doc["lcrm"], json!([["18014398509481986"]]));
    let doc = json_of(run_doc(&["rem"], json!({"matrix": [[7]], "vector": ["-100000000000000000000"]})));
    assert_eq!(doc["quotient"], json!(["-14285714285714285715"]));
    assert_eq!(doc["remainder"], json!([5]));
}

#[test]
fn overrides_flag_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ov.json");
    fs::write(&path, r#"[{"subset": [0], "lcrm": [[0, 3], [3, 1]]}]"#).unwrap();
    let input = r#"{"moduli": [[[3, 0], [1, 3]], [[3, 1], [0, 3]]], "rho": 2}"#;
    let out = mdcrt(&["neta", "--overrides", path.to_str().unwrap()], input);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["subset_lcrms"][0]["lcrm"], json!([[0, 3], [3, 1]]));

    fs::write(&path, r#"[{"subset": [0], "lcrm": [[1, 0], [0, 9]]}]"#).unwrap();
    let out = mdcrt(&["neta", "--overrides", path.to_str().unwrap()], input);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["kind"], "InvalidOverride");
}

/// Output matrices and vectors feed back into other commands unchanged.
#[test]
fn results_reparse_as_inputs() {
    let m1 = json!([[3, 0], [1, 3]]);
    let r = json_of(run_doc(&["lcrm"], json!({"moduli": [m1, [[3, 1], [0, 3]]]})));
    let again = json_of(run_doc(&["lcrm"], json!({"moduli": [r["lcrm"]]})));
    assert_eq!(again["lcrm"], r["lcrm"]);
    let pts = json_of(run_doc(&["fpd"], json!({"matrix": r["lcrm"]})));
    assert_eq!(pts["size"], json!(81));
    let p = &pts["points"][40];
    let rem = json_of(run_doc(&["rem"], json!({"matrix": r["lcrm"], "vector": p})));
    assert_eq!(&rem["remainder"], p);
}

#[test]
fn simulate_with_prior() {
    let input = json!({
        "moduli": [[[4, 1], [1, 1]], [[3, 3], [1, 2]], [[2, 1], [0, 2]], [[5, 1], [1, 1]]],
        "tones": [{"frequency": [10, 7]}, {"frequency": [8, 6], "amplitude": [0.5, 0.5]}]
    });
    let doc = json_of(run_doc(&["simulate", "--prior", "--seed", "3"], input));
    assert_eq!(doc["vectors"], json!([[8, 6], [10, 7]]));
    assert_eq!(doc["audit"][0]["d_star"], json!([2, 1]));
    assert_eq!(doc["residue_sets"][0].as_array().unwrap().len(), 2);
}

#[test]
fn simulate_with_noise_replays() {
    let input = r#"{"moduli": [[[3, 0], [1, 3]], [[3, 1], [0, 3]], [[4, 0], [1, 4]], [[4, 1], [0, 4]]],
        "tones": [{"frequency": [2, 4]}, {"frequency": [1, 7]}], "noise": 0.05,
        "overrides": [{"subset": [0, 1], "lcrm": [[9, 0], [0, 9]]}, {"subset": [0, 2], "lcrm": [[12, 0], [-5, 12]]},
                      {"subset": [0, 3], "lcrm": [[3, 0], [-20, 48]]}, {"subset": [1, 2], "lcrm": [[4, 0], [-15, 36]]},
                      {"subset": [1, 3], "lcrm": [[12, -5], [0, 12]]}, {"subset": [2, 3], "lcrm": [[16, 0], [0, 16]]}]}"#;
    let a = mdcrt(&["simulate", "--seed", "9"], input);
    let b = mdcrt(&["simulate", "--seed", "9"], input);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout_json(&a)["vectors"], json!([[1, 7], [2, 4]]));
}
