use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use num_complex::Complex64;
use tempfile::TempDir;

fn weyl(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_weyl")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn write_doc(dir: &TempDir, text: &str) -> PathBuf {
    let p = dir.path().join("doc.scenario");
    fs::write(&p, text).unwrap();
    p
}

fn body(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap();
    let (head, rest) = text.split_once('\n').unwrap();
    assert!(head.starts_with("# generated "), "{head}");
    rest.to_string()
}

fn value(report: &str, key: &str) -> String {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no {key} in\n{report}"))
        .to_string()
}

#[test]
fn momentum_scenario_passes() {
    let dir = TempDir::new().unwrap();
    let (code, err) = weyl(&["run", scenario("momentum.scenario").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let golden = body(&dir.path().join("00_momentum_golden.report"));
    let w2: f64 = value(&golden, "check.w2_half_identity.residual").parse().unwrap();
    assert!(w2 < 1e-12);
    assert_eq!(value(&body(&dir.path().join("summary.report")), "verdict"), "pass");
}

#[test]
fn golden_command() {
    let dir = TempDir::new().unwrap();
    let (code, _) = weyl(&["golden", "momentum", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    let r = body(&dir.path().join("momentum.report"));
    assert_eq!(value(&r, "verdict"), "pass");
    let (code, _) = weyl(&["golden", "nothing", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 1);
}

#[test]
fn empty_task_list() {
    let dir = TempDir::new().unwrap();
    let doc = write_doc(&dir, r#"{"version": 1, "tasks": []}"#);
    let out = dir.path().join("out");
    let (code, _) = weyl(&["run", doc.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let s = body(&out.join("summary.report"));
    assert_eq!(value(&s, "tasks"), "0");
    assert_eq!(fs::read_dir(&out).unwrap().count(), 1);
}

#[test]
fn undefined_object_names_it() {
    let dir = TempDir::new().unwrap();
    let doc = write_doc(
        &dir,
        r#"{"version": 1, "tasks": [{"op": "herglotz_probe", "function": "phantom", "probes": [[0, 1]]}]}"#,
    );
    let (code, err) = weyl(&["run", doc.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("phantom"), "{err}");
}

#[test]
fn parse_error_reports_position() {
    let dir = TempDir::new().unwrap();
    let doc = write_doc(&dir, "{\n  \"version\": 1,\n  \"tasks\": [,]\n}");
    let (code, err) = weyl(&["run", doc.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn failing_task_exits_two() {
    let dir = TempDir::new().unwrap();
    let (code, _) = weyl(&["run", scenario("sharpness.scenario").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 2);
    let r = body(&dir.path().join("03_uniqueness.report"));
    assert_eq!(value(&r, "verdict"), "fail");
    assert!(r.contains("hypothesis (a1) violated"), "{r}");
    let summary = body(&dir.path().join("summary.report"));
    for (i, verdict) in ["pass", "pass", "fail", "fail"].iter().enumerate() {
        let s = value(&summary, &format!("task.{i:02}"));
        assert!(s.ends_with(verdict), "{s}");
    }
    let lower = body(&dir.path().join("02_full_equality.report"));
    assert_eq!(value(&lower, "check.lower_set_nonempty.pass"), "false");
}

const PAIR: &str = r#"{"version": 1, "objects": {
    "pair": {"kind": "system", "a": [[[0, 0], [1, 0]], [[1, 0], [0, 0]]], "k": [[[0, 0]], [[1, 0]]], "f": [[[0, 0]]]},
    "one": {"kind": "herglotz", "dim": 1, "c": [[[2, 0]]], "shift": [[[1, 0]]]}}}"#;

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn sample_transfer_function_on_imaginary_axis() {
    let dir = TempDir::new().unwrap();
    let doc = write_doc(&dir, PAIR);
    let out = dir.path().join("t.csv");
    let (code, err) =
        weyl(&["sample", doc.to_str().unwrap(), "--object", "pair", "--grid", "0,0.1:0,10:25", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let header = fs::read_to_string(&out).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, "re,im,status,m00_re,m00_im");
    let rows = rows(&out);
    assert_eq!(rows.len(), 25);
    for r in rows {
        let y: f64 = r[1].parse().unwrap();
        assert_eq!(r[2], "0");
        let got = Complex64::new(r[3].parse().unwrap(), r[4].parse().unwrap());
        let want = Complex64::new(0.0, -y) / (-y * y - 1.0);
        assert!((got - want).norm() < 1e-14 * want.norm().max(1.0), "{y}: {got} vs {want}");
    }
}

#[test]
fn sample_constant_function() {
    let dir = TempDir::new().unwrap();
    let doc = write_doc(&dir, PAIR);
    let out = dir.path().join("c.csv");
    let (code, _) =
        weyl(&["sample", doc.to_str().unwrap(), "--object", "one", "--grid=-1,0.5:1,2:3,3", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    for r in rows(&out) {
        assert_eq!((r[3].as_str(), r[4].as_str()), ("2.0000000000000000e0", "1.0000000000000000e0"));
    }
}

#[test]
fn sample_through_pole_marks_row() {
    let dir = TempDir::new().unwrap();
    let doc = write_doc(&dir, PAIR);
    let out = dir.path().join("p.csv");
    let (code, _) =
        weyl(&["sample", doc.to_str().unwrap(), "--object", "pair", "--grid", "0.5,0:1.5,0:3", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let rows = rows(&out);
    assert_eq!(rows[1][2], "1");
    assert_eq!(rows[1][3], "NaN");
    assert_eq!(rows[0][2], "0");
    assert_eq!(rows[2][2], "0");
}

#[test]
fn sample_rejects_specs_and_unknown_names() {
    let dir = TempDir::new().unwrap();
    let doc = write_doc(&dir, r#"{"version": 1, "objects": {"s": {"kind": "spec", "b": [[[0, 0]]], "k": [[[1, 0]]]}}}"#);
    let out = dir.path().join("x.csv");
    for name in ["s", "missing"] {
        let (code, _) =
            weyl(&["sample", doc.to_str().unwrap(), "--object", name, "--grid", "0,1:0,2:2", "--out", out.to_str().unwrap()]);
        assert_eq!(code, 1);
    }
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(weyl(&["run"]).0, 1);
    assert_eq!(weyl(&["frobnicate"]).0, 1);
    assert_eq!(weyl(&["--help"]).0, 0);
}

#[test]
fn tolerance_flag_applies() {
    let dir = TempDir::new().unwrap();
    let doc = write_doc(
        &dir,
        r#"{"version": 1, "tasks": [{"op": "spectral_measure", "matrix": [[[1, 0], [0, 0]], [[0, 0], [2, 0]]]}]}"#,
    );
    let (code, _) = weyl(&["--tol=-1", "run", doc.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 1);
    let (code, _) = weyl(&["--tol", "1e-9", "run", doc.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    let r = body(&dir.path().join("00_spectral_measure.report"));
    assert_eq!(value(&r, "check.reconstruction.tolerance"), "1.0000000000000001e-9");
}

#[test]
fn book_example_document_runs() {
    let book = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../book/src/scenarios.md")).unwrap();
    let start = book.find("```json\n").unwrap() + 8;
    let text = &book[start..start + book[start..].find("```").unwrap()];
    let dir = TempDir::new().unwrap();
    let doc = write_doc(&dir, text);
    let out = dir.path().join("out");
    let (code, err) = weyl(&["run", doc.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(out.join("summary.report").exists());
}
