//! The three commands, each returning its exit code.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use weyl::equivalence::{self, ScenarioReport};
use weyl::Error as CoreError;

use crate::document::ScenarioDocument;
use crate::error::CliError;
use crate::grid::parse_grid;
use crate::tasks::{self, TaskError};
use crate::workspace::Workspace;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_FAIL: i32 = 2;
pub const DEFAULT_TOL: f64 = 1e-10;

/// Global knobs from the command line; they override the document.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

pub fn header() -> String {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    format!("# generated {secs}\n")
}

fn write(path: &Path, body: &str) -> Result<(), CliError> {
    fs::write(path, format!("{}{body}", header())).map_err(|e| CliError::io(path, e))
}

pub fn load(path: &Path) -> Result<ScenarioDocument, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    ScenarioDocument::parse(&text)
}

fn workspace(doc: &ScenarioDocument, o: Overrides) -> Result<Workspace, CliError> {
    let tol = o.tol.or(doc.tol).unwrap_or(DEFAULT_TOL);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::Input(format!("tolerance must be positive, got {tol}")));
    }
    Workspace::build(doc, o.seed.unwrap_or(doc.seed), tol)
}

/// Runs every task in order, writing `NN_<op>.report` files and `summary.report`.
pub fn run(doc_path: &Path, out: &Path, o: Overrides) -> Result<i32, CliError> {
    let doc = load(doc_path)?;
    let ws = workspace(&doc, o)?;
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut summary = String::new();
    let mut passed = 0;
    let mut lines = Vec::new();
    for (i, task) in doc.tasks.iter().enumerate() {
        let name = task.op.name();
        let report = match tasks::execute(&ws, task) {
            Ok(r) => r,
            Err(TaskError::Input(e)) => return Err(CliError::Input(format!("task {i} ({name}): {e}"))),
            Err(TaskError::Numerical(e)) => failed(name, &e),
        };
        write(&out.join(format!("{i:02}_{name}.report")), &report.render())?;
        let verdict = report.verdict();
        passed += usize::from(verdict);
        lines.push(format!("task.{i:02} = {name} {}", if verdict { "pass" } else { "fail" }));
    }
    let total = doc.tasks.len();
    let _ = writeln!(summary, "tasks = {total}");
    let _ = writeln!(summary, "passed = {passed}");
    let _ = writeln!(summary, "failed = {}", total - passed);
    for l in lines {
        let _ = writeln!(summary, "{l}");
    }
    let _ = writeln!(summary, "verdict = {}", if passed == total { "pass" } else { "fail" });
    write(&out.join("summary.report"), &summary)?;
    Ok(if passed == total { EXIT_PASS } else { EXIT_FAIL })
}

fn failed(name: &str, e: &CoreError) -> ScenarioReport {
    let mut r = ScenarioReport::new(name);
    r.flag("completed", false);
    r.note(format!("error: {e}"));
    r
}

/// Writes `momentum.report` for the built-in golden scenario.
pub fn golden(which: &str, out: &Path) -> Result<i32, CliError> {
    if which != "momentum" {
        return Err(CliError::Input(format!("unknown golden scenario `{which}`")));
    }
    let report = equivalence::momentum_golden()?;
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    write(&out.join("momentum.report"), &report.render())?;
    Ok(if report.verdict() { EXIT_PASS } else { EXIT_FAIL })
}

/// Status column of a sample row.
pub const STATUS_OK: u8 = 0;
pub const STATUS_SINGULAR: u8 = 1;

/// Evaluates a named matrix function on a grid and writes a CSV table.
pub fn sample(doc_path: &Path, object: &str, grid: &str, out: &Path, o: Overrides) -> Result<i32, CliError> {
    let doc = load(doc_path)?;
    let ws = workspace(&doc, o)?;
    let obj = ws.get(object).map_err(|_| CliError::Unresolved { site: "sample".into(), name: object.into() })?;
    let points = parse_grid(grid)?;
    let mut rows = Vec::with_capacity(points.len());
    let mut dims = None;
    for &z in &points {
        match obj.evaluate(z) {
            Ok(Some(v)) => {
                dims = Some((v.nrows(), v.ncols()));
                rows.push((z, Some(v)));
            }
            Ok(None) => return Err(CliError::Input(format!("`{object}` is a {}, not a matrix function", obj.kind()))),
            Err(CoreError::SingularAt { .. } | CoreError::Singular { .. } | CoreError::OnSupport(_)) => {
                rows.push((z, None))
            }
            Err(e) => return Err(e.into()),
        }
    }
    let (nr, nc) = match dims {
        Some(d) => d,
        None => {
            let k = obj.evaluate(points[0] + num_complex::Complex64::new(0.0, 1.0)).ok().flatten();
            k.map_or((0, 0), |v| (v.nrows(), v.ncols()))
        }
    };
    let mut csv = String::from("re,im,status");
    for i in 0..nr {
        for j in 0..nc {
            let _ = write!(csv, ",m{i}{j}_re,m{i}{j}_im");
        }
    }
    csv.push('\n');
    for (z, v) in rows {
        let _ = write!(csv, "{:.16e},{:.16e}", z.re, z.im);
        match v {
            Some(v) => {
                let _ = write!(csv, ",{STATUS_OK}");
                for i in 0..nr {
                    for j in 0..nc {
                        let _ = write!(csv, ",{:.16e},{:.16e}", v[(i, j)].re, v[(i, j)].im);
                    }
                }
            }
            None => {
                let _ = write!(csv, ",{STATUS_SINGULAR}");
                csv.push_str(&",NaN".repeat(2 * nr * nc));
            }
        }
        csv.push('\n');
    }
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(out, csv).map_err(|e| CliError::io(out, e))?;
    Ok(EXIT_PASS)
}
