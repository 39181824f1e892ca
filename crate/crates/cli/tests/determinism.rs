use std::fs;
use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

fn bundled() -> Vec<std::path::PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "scenario"))
        .collect();
    v.sort();
    v
}

fn run(doc: &Path, out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_weyl"))
        .args(["run", doc.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap()
        .code()
        .unwrap()
}

fn without_header(p: &Path) -> Vec<u8> {
    let bytes = fs::read(p).unwrap();
    let cut = bytes.iter().position(|&b| b == b'\n').unwrap();
    assert!(bytes.starts_with(b"# generated "));
    bytes[cut + 1..].to_vec()
}

#[test]
fn every_report_has_a_header() {
    let out = TempDir::new().unwrap();
    let doc = bundled().into_iter().find(|p| p.ends_with("momentum.scenario")).unwrap();
    assert_eq!(run(&doc, out.path()), 0);
    for e in fs::read_dir(out.path()).unwrap() {
        assert!(!without_header(&e.unwrap().path()).is_empty());
    }
}

#[test]
fn bundled_scenarios_expected_exit_codes() {
    for doc in bundled() {
        let out = TempDir::new().unwrap();
        let code = run(&doc, out.path());
        let expect = if doc.file_name().unwrap() == "sharpness.scenario" { 2 } else { 0 };
        assert_eq!(code, expect, "{}", doc.display());
    }
}
