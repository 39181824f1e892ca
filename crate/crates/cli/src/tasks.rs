//! One report per task.

use num_complex::Complex64;
use weyl::equivalence::{self, PipelineCase, ScenarioReport};
use weyl::herglotz::{self, WeylTransformSpec};
use weyl::linalg::{self, CMatrix};
use weyl::measures;
use weyl::realization::{self, Similarity};
use weyl::triplets::{self, OrdinaryTripletModel};

use crate::document::{CaseDef, Expectation, Op, TaskDef};
use crate::error::CliError;
use crate::grid::{resolve, scalar};
use crate::workspace::{matrix, Workspace};

/// ‖M(z) − F‖/max(1, ‖K*K‖) allowed at |z| = 1e6.
const FAR_POINT_TOL: f64 = 1e-5;
const SIMILARITY_TOL: f64 = 1e-8;

/// Why a task produced no report.
pub enum TaskError {
    /// Bad input: exit code 1.
    Input(CliError),
    /// A numerical failure: reported as a failing check.
    Numerical(weyl::Error),
}

impl From<CliError> for TaskError {
    fn from(e: CliError) -> Self {
        match e {
            CliError::Core(c) => c.into(),
            other => TaskError::Input(other),
        }
    }
}

impl From<weyl::Error> for TaskError {
    fn from(e: weyl::Error) -> Self {
        use weyl::Error as E;
        match e {
            E::Dimension(_) | E::InvalidArgument(_) | E::InvalidTolerance(_) | E::Empty(_) | E::InvalidSet(_) => {
                TaskError::Input(CliError::Core(e))
            }
            other => TaskError::Numerical(other),
        }
    }
}

fn rel(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

fn upper(probes: &[Complex64]) -> Vec<Complex64> {
    probes.iter().copied().filter(|z| z.im > 0.0).collect()
}

pub fn execute(ws: &Workspace, task: &TaskDef) -> Result<ScenarioReport, TaskError> {
    let tol = task.tol.unwrap_or(ws.tol);
    let name = task.op.name();
    let mut r = ScenarioReport::new(name);
    match &task.op {
        Op::MomentumGolden => return Ok(equivalence::momentum_golden()?),
        Op::HerglotzProbe { function, probes } => {
            let f = ws.function(function)?;
            let probes = resolve(probes)?;
            let (sym, _) = herglotz::herglotz_probe(&f, &probes)?;
            r.check("symmetry", sym, tol);
            let up = upper(&probes);
            if !up.is_empty() {
                let (_, min_im) = herglotz::herglotz_probe(&f, &up)?;
                r.check("positivity", (-min_im).max(0.0), tol);
            }
        }
        Op::BasicLemma { left, right, probes } => {
            let (a, b) = (ws.side(left)?, ws.side(right)?);
            let l = herglotz::basic_lemma_check(&a.weyl, &a.spec, &b.weyl, &b.spec, &resolve(probes)?, tol)?;
            lemma_checks(&mut r, "", &l);
        }
        Op::FullEquality { left, right, upper, lower } => {
            let (a, b) = (ws.side(left)?, ws.side(right)?);
            let f = herglotz::full_equality_check(
                &a.weyl,
                &a.spec,
                &b.weyl,
                &b.spec,
                &resolve(upper)?,
                &resolve(lower)?,
                tol,
            )?;
            lemma_checks(&mut r, "upper_", &f.upper);
            r.flag("lower_set_nonempty", f.lower_set_nonempty());
            r.check("lower_transform", f.lower_residual, tol);
            r.check("measure", f.measure_residual, tol);
            r.check("im_b", f.im_b_residual, tol);
            r.note(format!("lower probes defined on both sides: {}", f.lower_defined));
        }
        Op::Counterexample { function, b1, z0, probes } => {
            let f = ws.function(function)?;
            return Ok(equivalence::counterexample_report(&f, &matrix(b1, "b1")?, scalar(z0), &resolve(probes)?, tol)?);
        }
        Op::Uniqueness { left, right, case, probes } => {
            let case = match case {
                CaseDef::A1 { window } => PipelineCase::A1 { window: (window[0], window[1]) },
                CaseDef::A2 => PipelineCase::A2,
                CaseDef::A3 { window } => PipelineCase::A3 { window: (window[0], window[1]) },
                CaseDef::A4 { t0, ys } => PipelineCase::A4 { t0: *t0, ys: ys.clone() },
            };
            return Ok(equivalence::uniqueness_pipeline(&ws.side(left)?, &ws.side(right)?, &resolve(probes)?, &case, tol)?);
        }
        Op::Similarity { left, right, expect } => {
            let (s1, s2) = (ws.system(left)?, ws.system(right)?);
            match realization::decide_unitary_similarity(&s1, &s2, tol)? {
                Similarity::Equivalent(u) => {
                    r.flag("decision", *expect == Expectation::Equivalent);
                    let res = realization::verify_similarity(&s1, &s2, &u)?;
                    r.check("similarity", res.max(), SIMILARITY_TOL.max(tol));
                    r.unitary = Some(u);
                }
                Similarity::NotEquivalent(m) => {
                    r.flag("decision", *expect == Expectation::NotEquivalent);
                    r.note(format!("not equivalent: {m}"));
                }
            }
        }
        Op::TripletIdentities { model, spec, probes } => {
            let m = ws.model(model)?;
            let spec = match spec {
                Some(s) => ws.spec(s)?,
                None => {
                    let k = m.base().k();
                    WeylTransformSpec::new(linalg::zeros(k, k), linalg::eye(k), tol)?
                }
            };
            identities(&mut r, &m, &spec, &upper(&resolve(probes)?), tol)?;
        }
        Op::Spectrum { model, theta } => {
            let m = ws.model(model)?;
            let theta = matrix(theta, "theta")?;
            let zeros = m.weyl_zeros(&theta)?;
            let eig = linalg::eigenvalues(&m.extension_matrix(&theta));
            r.check("zeros_match_eigenvalues", triplets::match_distance(&zeros, &eig), tol);
            r.note(format!("eigenvalues: {}", eig.len()));
        }
        Op::SpectralMeasure { matrix: h } => {
            let h = matrix(h, "matrix")?;
            let e = measures::spectral_measure(&h, tol)?;
            let n = h.nrows();
            let sum: CMatrix = e.atoms().iter().fold(linalg::zeros(n, n), |acc, a| acc + &a.weight);
            let rec: CMatrix =
                e.atoms().iter().fold(linalg::zeros(n, n), |acc, a| acc + &a.weight * Complex64::new(a.point, 0.0));
            r.check("resolution_of_identity", (sum - linalg::eye(n)).norm(), tol);
            r.check("reconstruction", rel(&rec, &h), tol);
            r.note(format!("distinct eigenvalues: {}", e.atoms().len()));
        }
        Op::Stieltjes { function, window, ys, expected } => {
            let f = ws.function(function)?;
            let im_f = |x: f64, y: f64| f.evaluate(Complex64::new(x, y)).map(|v| linalg::im_part(&v));
            let est = measures::stieltjes_invert(&im_f, (window[0], window[1]), ys, tol)?;
            let want = matrix(expected, "expected")?;
            r.check("mass", (&est.mass - &want).norm() / want.norm().max(f64::MIN_POSITIVE), tol);
            r.note(format!("extrapolation error estimate: {:.3e}", est.error_estimate));
        }
        Op::Characteristic { function, b, k, j, probes, expected } => {
            let f = ws.function(function)?;
            let (b, k, j) = (matrix(b, "b")?, matrix(k, "k")?, matrix(j, "j")?);
            let want = matrix(expected, "expected")?;
            let mut worst: f64 = 0.0;
            for z in resolve(probes)? {
                worst = worst.max(rel(&herglotz::characteristic_function(&f, &b, &k, &j, z, tol)?, &want));
            }
            r.check("characteristic_value", worst, tol);
        }
    }
    Ok(r)
}

fn lemma_checks(r: &mut ScenarioReport, prefix: &str, l: &herglotz::LemmaReport) {
    r.check(format!("{prefix}transform"), l.transform_residual, l.tol);
    r.check(format!("{prefix}singular_parts"), l.singular_residual, l.tol);
    r.check(format!("{prefix}ac_parts"), l.ac_residual, l.tol);
    r.check(format!("{prefix}real_parts"), l.real_part_residual, l.tol);
    r.check(format!("{prefix}linear_terms"), l.linear_residual, l.tol);
}

fn identities(
    r: &mut ScenarioReport,
    m: &OrdinaryTripletModel,
    spec: &WeylTransformSpec,
    probes: &[Complex64],
    tol: f64,
) -> weyl::Result<()> {
    let base = m.base();
    let t = m.triplet();
    r.check("green_identity", t.green_residual(), tol);
    let hat = m.hat_transform(spec.k(), spec.b())?;
    let dual = m.dual_pair_triplet(spec.k(), spec.b())?;
    let bt = dual.to_bt_inf()?;
    let bt_triplet = bt.triplet();
    let lambda0 = 1.0 + linalg::norm2(&bt.a0());
    let mobius = triplets::mobius_transform(&bt_triplet, lambda0, tol)?;
    let mut worst = [0.0f64; 5];
    for &z in probes {
        let w = m.weyl(z)?;
        worst[0] = worst[0].max(rel(&t.weyl_from_defect(z)?, &w));
        if base.d() > 0 {
            let (direct, schur) = triplets::schur_compression(&m.a0_tilde(), base.d(), z, tol)?;
            worst[1] = worst[1].max(rel(&direct, &schur));
        }
        worst[2] = worst[2].max(rel(&hat.weyl(z)?, &spec.hat(&w)));
        worst[3] = worst[3].max(rel(&dual.weyl_from_defect(z)?, &bt.weyl_function(z)?));
        let far = -bt_triplet.weyl_from_defect(Complex64::new(lambda0, 0.0) + 1.0 / z)?;
        worst[4] = worst[4].max(rel(&mobius.triplet.weyl_from_defect(z)?, &far));
    }
    r.check("weyl_defining_relation", worst[0], tol);
    if base.d() > 0 {
        r.check("schur_compression", worst[1], tol);
    }
    r.check("hat_weyl_law", worst[2], tol);
    r.check("dual_pair_vs_bt_inf", worst[3], tol);
    r.check("mobius_relation", worst[4], tol);
    let (_, sys) = equivalence::hat_system(m, spec)?;
    let z = Complex64::from_polar(1e6, 1.0);
    let scale = (sys.k().adjoint() * sys.k()).norm().max(1.0);
    r.check("far_point_limit", (sys.transfer_function(z)? - sys.f()).norm() / scale, FAR_POINT_TOL);
    Ok(())
}
