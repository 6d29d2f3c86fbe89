//! Replays every bundled fixture through the binary and compares the output
//! with the stored result after key-sorted canonicalization.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn fixtures() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json") && !p.to_string_lossy().ends_with(".expected.json"))
        .collect();
    out.sort();
    out
}

/// Objects are backed by a sorted map, so printing is canonical.
fn canonical(text: &str) -> String {
    serde_json::from_str::<Value>(text).unwrap().to_string()
}

#[test]
fn fixtures_replay_byte_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let list = fixtures();
    assert!(list.len() >= 6);
    for path in list {
        let case: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        let input = tmp.path().join("input.json");
        fs::write(&input, case["input"].to_string()).unwrap();
        let args: Vec<&str> = case["args"].as_array().unwrap().iter().map(|a| a.as_str().unwrap()).collect();
        let out = Command::new(env!("CARGO_BIN_EXE_mdcrt"))
            .arg(case["command"].as_str().unwrap())
            .arg(&input)
            .args(&args)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
        let stdout = String::from_utf8(out.stdout).unwrap();
        assert!(stdout.ends_with('\n'));
        let expected = fs::read_to_string(path.with_extension("expected.json")).unwrap();
        assert_eq!(canonical(&stdout), canonical(&expected), "{}", path.display());
    }
}

fn keys(v: &Value) -> Vec<String> {
    v.as_object().map(|o| o.keys().cloned().collect()).unwrap_or_default()
}

/// The shipped schemas name exactly the top-level properties the fixtures
/// use and produce.
#[test]
fn schemas_cover_fixture_documents() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas");
    for path in fixtures() {
        let case: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        let command = case["command"].as_str().unwrap();
        let schema: Value = serde_json::from_str(&fs::read_to_string(dir.join(format!("{command}.json"))).unwrap()).unwrap();
        let input = &schema["$defs"]["input"];
        let allowed = keys(&input["properties"]);
        for k in keys(&case["input"]) {
            assert!(allowed.contains(&k), "{command}: input property {k} missing from schema");
        }
        for r in input["required"].as_array().unwrap() {
            assert!(case["input"].get(r.as_str().unwrap()).is_some(), "{command}: required {r}");
        }
        let expected: Value = serde_json::from_str(&fs::read_to_string(path.with_extension("expected.json")).unwrap()).unwrap();
        let mut produced = keys(&expected);
        let mut declared = keys(&schema["$defs"]["output"]["properties"]);
        produced.sort();
        declared.sort();
        assert_eq!(produced, declared, "{command}");
    }
}
