//! End-to-end uniqueness checks and the constructions showing where they fail.
//!
//! The negative results live at the level of Herglotz functions: M₂ = M₁ + B
//! with Im B ≻ 0 carries an ac density on the whole line, so no finite matrix
//! model realizes it and none is attempted here.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{check_tol, Error, Result};
use crate::herglotz::{
    basic_lemma_check, characteristic_function, full_equality_check, tilde_data, weak_derivative_check,
    weyl_transform, HerglotzMatrixFunction, MatrixFunction, WeylTransformSpec,
};
use crate::linalg::{self, c, CMatrix};
use crate::measures::{self, BorelSet};
use crate::realization::{decide_unitary_similarity, verify_similarity, PqsSystem, Similarity};
use crate::triplets::OrdinaryTripletModel;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Named list of residual checks; the verdict is their conjunction.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub name: String,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub unitary: Option<CMatrix>,
}

impl ScenarioReport {
    pub fn new(name: impl Into<String>) -> Self {
        ScenarioReport { name: name.into(), checks: Vec::new(), notes: Vec::new(), unitary: None }
    }

    /// Records `residual <= tolerance`.
    pub fn check(&mut self, label: impl Into<String>, residual: f64, tolerance: f64) -> bool {
        let pass = residual <= tolerance;
        self.checks.push(Check { label: label.into(), residual, tolerance, pass });
        pass
    }

    /// Records a yes/no condition as residual 0 (holds) or 1 (fails) against tolerance 0.
    pub fn flag(&mut self, label: impl Into<String>, holds: bool) -> bool {
        self.check(label, if holds { 0.0 } else { 1.0 }, 0.0)
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn verdict(&self) -> bool {
        self.checks.iter().all(|ch| ch.pass)
    }

    pub fn failed(&self) -> Vec<&Check> {
        self.checks.iter().filter(|ch| !ch.pass).collect()
    }

    /// Fixed-order `key = value` text, residuals with 17 significant digits.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario = {}", self.name);
        let _ = writeln!(out, "verdict = {}", if self.verdict() { "pass" } else { "fail" });
        let _ = writeln!(out, "checks = {}", self.checks.len());
        for ch in &self.checks {
            let _ = writeln!(out, "check.{}.residual = {:.16e}", ch.label, ch.residual);
            let _ = writeln!(out, "check.{}.tolerance = {:.16e}", ch.label, ch.tolerance);
            let _ = writeln!(out, "check.{}.pass = {}", ch.label, ch.pass);
        }
        if let Some(u) = &self.unitary {
            let _ = writeln!(out, "unitary.dim = {}", u.nrows());
        }
        for (i, n) in self.notes.iter().enumerate() {
            let _ = writeln!(out, "note.{i} = {n}");
        }
        out
    }
}

/// Where the transforms of a counterexample pair agree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpperSet {
    /// All of ℂ₊ (B₁ strictly accumulative).
    HalfPlane,
    /// ℂ₊ without the zeros of det(B₁ − M₁(z)).
    HalfPlaneMinusZeros,
}

impl std::fmt::Display for UpperSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UpperSet::HalfPlane => write!(f, "C+"),
            UpperSet::HalfPlaneMinusZeros => write!(f, "C+ minus zeros of det(B1 - M1(z))"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub m2: HerglotzMatrixFunction,
    pub b2: CMatrix,
    /// The added constant: B = c(1 + i)I with c = 1 + ‖Im B₁‖.
    pub b: CMatrix,
    pub upper: UpperSet,
}

/// M₂ = M₁ + B, B₂ = B₁ + B with B = c(1 + i)I, c = 1 + ‖Im B₁‖.
///
/// Then (B₁ − M₁(z))⁻¹ = (B₂ − M₂(z))⁻¹ on ℂ₊, B and B₂ are dissipative, and
/// the hat Weyl functions (K = I) differ by i·Im B, of norm ‖Re B‖ = ‖Im B‖ = c.
pub fn construct_counterexample(
    m1: &HerglotzMatrixFunction,
    b1: &CMatrix,
    z0: Complex64,
    tol: f64,
) -> Result<Counterexample> {
    check_tol(tol)?;
    let k = m1.dim();
    if b1.nrows() != k || b1.ncols() != k {
        return Err(Error::Dimension(format!("B1 must be {k}x{k}")));
    }
    if !(z0.im > 0.0) {
        return Err(Error::InvalidArgument(format!("z0 = {z0} is not in the upper half-plane")));
    }
    linalg::inverse_at(&(b1 - m1.evaluate(z0)?), "B1 - M1(z0)", z0, tol)?;
    let im_b1 = linalg::im_part(b1);
    let cc = 1.0 + linalg::norm2(&im_b1);
    let b = linalg::scalar(k, c(cc, cc));
    let m2 = m1.add_constant(&b)?;
    let upper = if linalg::eigh(&im_b1).0.last().copied().unwrap_or(0.0) < -tol {
        UpperSet::HalfPlane
    } else {
        UpperSet::HalfPlaneMinusZeros
    };
    Ok(Counterexample { m2, b2: b1 + &b, b, upper })
}

/// Contract checks for [`construct_counterexample`] on an upper probe grid.
pub fn counterexample_report(
    m1: &HerglotzMatrixFunction,
    b1: &CMatrix,
    z0: Complex64,
    probes: &[Complex64],
    tol: f64,
) -> Result<ScenarioReport> {
    let ce = construct_counterexample(m1, b1, z0, tol)?;
    let k = b1.nrows();
    let mut r = ScenarioReport::new("counterexample");
    let s1 = WeylTransformSpec::new(b1.clone(), linalg::eye(k), tol)?;
    let s2 = WeylTransformSpec::new(ce.b2.clone(), linalg::eye(k), tol)?;
    let mut worst: f64 = 0.0;
    let mut skipped = 0;
    for &z in probes {
        match (weyl_transform(m1, &s1, z), weyl_transform(&ce.m2, &s2, z)) {
            (Ok(w1), Ok(w2)) => worst = worst.max((&w1 - w2).norm() / w1.norm().max(1.0)),
            (Err(Error::SingularAt { .. }), Err(Error::SingularAt { .. })) => skipped += 1,
            _ => worst = f64::INFINITY,
        }
    }
    r.check("transform_equality", worst, 1e-12);
    r.flag("b_dissipative", linalg::min_eigenvalue(&linalg::im_part(&ce.b)) > 0.0);
    r.flag("b2_dissipative", linalg::min_eigenvalue(&linalg::im_part(&ce.b2)) > 0.0);
    let i = c(0.0, 1.0);
    let gap = linalg::norm2(&(s1.hat(&m1.evaluate(i)?) - s2.hat(&ce.m2.evaluate(i)?)));
    let re_b = linalg::norm2(&linalg::re_part(&ce.b));
    r.check("hat_gap_equals_re_b", (gap - re_b).abs(), 1e-12 * re_b.max(1.0));
    r.flag("hat_gap_positive", gap > 0.0);
    let line = linalg::im_part(&ce.b) / c(PI, 0.0);
    let mut sigma_residual: f64 = 0.0;
    for (a, bb) in [(-3.0, -1.0), (-0.5, 0.25), (0.1, 2.7)] {
        let set = BorelSet::interval(a, bb)?;
        let lhs = ce.m2.full_measure().apply(&set);
        let rhs = m1.full_measure().apply(&set) + &line * c(bb - a, 0.0);
        sigma_residual = sigma_residual.max((lhs - rhs).norm());
    }
    r.check("measure_shift", sigma_residual, 1e-12);
    r.note(format!("transforms agree on {}", ce.upper));
    if skipped > 0 {
        r.note(format!("{skipped} probes hit zeros of det(B1 - M1(z))"));
    }
    Ok(r)
}

/// 50 points of ℂ₊: x ∈ {−4.5, …, 4.5}, y ∈ {0.1, 0.5, 1, 2, 5}.
pub fn momentum_grid() -> Vec<Complex64> {
    let ys = [0.1, 0.5, 1.0, 2.0, 5.0];
    (0..10).flat_map(|i| ys.iter().map(move |&y| c(-4.5 + i as f64, y))).collect()
}

/// M₁ ≡ ±iI, M₂ ≡ ±3iI on ℂ±, B₁ = −iI, B₂ = iI, K = I, in dimension `k`.
pub fn momentum_pair(k: usize, tol: f64) -> Result<[(HerglotzMatrixFunction, WeylTransformSpec); 2]> {
    let m1 = HerglotzMatrixFunction::imaginary_constant(linalg::eye(k), tol)?;
    let m2 = HerglotzMatrixFunction::imaginary_constant(linalg::eye(k) * c(3.0, 0.0), tol)?;
    let s1 = WeylTransformSpec::new(linalg::scalar(k, c(0.0, -1.0)), linalg::eye(k), tol)?;
    let s2 = WeylTransformSpec::new(linalg::scalar(k, c(0.0, 1.0)), linalg::eye(k), tol)?;
    Ok([(m1, s1), (m2, s2)])
}

/// The momentum example: equal transforms on ℂ₊, W₂ ≡ ½I, the ac-density relation,
/// and the total kernel of B₁ − M₁(z) on ℂ₋.
pub fn momentum_golden() -> Result<ScenarioReport> {
    let tol = 1e-12;
    let k = 2;
    let [(m1, s1), (m2, s2)] = momentum_pair(k, linalg::DEFAULT_TOL)?;
    let grid = momentum_grid();
    let mut r = ScenarioReport::new("momentum");

    let (mut eq, mut value) = (0.0f64, 0.0f64);
    let half_i = linalg::scalar(k, c(0.0, 0.5));
    for &z in &grid {
        let w1 = weyl_transform(&m1, &s1, z)?;
        let w2 = weyl_transform(&m2, &s2, z)?;
        eq = eq.max((&w1 - w2).norm());
        value = value.max((w1 - &half_i).norm());
    }
    r.check("transform_equality", eq, tol);
    r.check("transform_value_i_over_2", value, tol);

    let mut w_res: f64 = 0.0;
    for &z in &grid {
        let w = characteristic_function(&m2, s2.b(), &linalg::eye(k), &linalg::eye(k), z, linalg::DEFAULT_TOL)?;
        w_res = w_res.max((w - linalg::eye(k) * c(0.5, 0.0)).norm());
    }
    r.check("w2_half_identity", w_res, tol);

    let lemma = basic_lemma_check(&m1, &s1, &m2, &s2, &grid, tol)?;
    r.check("lemma_ac_relation", lemma.ac_residual, tol);
    let t1 = tilde_data(&m1, &s1)?;
    let t2 = tilde_data(&m2, &s2)?;
    let im_gap = linalg::im_part(&t2.b) - linalg::im_part(&t1.b);
    r.check("im_b_gap_two", (im_gap - linalg::eye(k) * c(2.0, 0.0)).norm(), tol);
    let delta = BorelSet::interval(-1.0, 2.0)?;
    let diff = m2.full_measure().apply(&delta) - m1.full_measure().apply(&delta);
    r.check("ac_gap_two_over_pi", (diff - linalg::eye(k) * c(2.0 / PI * 3.0, 0.0)).norm(), tol);

    let mut kernel: f64 = 0.0;
    let mut rank = 0;
    for z in grid.iter().map(|z| z.conj()) {
        let m = s1.b() - m1.evaluate(z)?;
        kernel = kernel.max(m.norm());
        rank = rank.max(linalg::rank(&m, linalg::DEFAULT_TOL));
    }
    r.check("lower_total_kernel", kernel, tol);
    r.flag("lower_rank_zero", rank == 0);

    let lower: Vec<Complex64> = grid.iter().map(|z| z.conj()).collect();
    let full = full_equality_check(&m1, &s1, &m2, &s2, &grid, &lower, tol)?;
    r.flag("lower_set_empty", !full.lower_set_nonempty() && full.lower_one_sided == lower.len());
    r.note("(B1 - M1(z))^-1 = (-2i)^-1 I = (i/2) I on C+");
    r.note("on C- the transform of the first pair is undefined at every probe, so Omega- is empty");
    Ok(r)
}

/// One side of the uniqueness pipeline: a Weyl function, optionally its finite model, and (K, B).
#[derive(Debug, Clone)]
pub struct PipelineSide {
    pub weyl: HerglotzMatrixFunction,
    pub model: Option<OrdinaryTripletModel>,
    pub spec: WeylTransformSpec,
}

impl PipelineSide {
    pub fn from_model(model: OrdinaryTripletModel, spec: WeylTransformSpec) -> Result<Self> {
        Ok(PipelineSide { weyl: model.weyl_herglotz()?, model: Some(model), spec })
    }

    pub fn from_function(weyl: HerglotzMatrixFunction, spec: WeylTransformSpec) -> Self {
        PipelineSide { weyl, model: None, spec }
    }
}

/// Which extra hypothesis licenses the uniqueness conclusion.
#[derive(Debug, Clone, PartialEq)]
pub enum PipelineCase {
    /// ac parts not Lebesgue-equivalent on the window.
    A1 { window: (f64, f64) },
    /// Equality also on the lower probes.
    A2,
    /// ac support does not cover the window.
    A3 { window: (f64, f64) },
    /// Equal weak derivatives at t₀, estimated along `ys`.
    A4 { t0: f64, ys: Vec<f64> },
}

impl PipelineCase {
    pub fn label(&self) -> &'static str {
        match self {
            PipelineCase::A1 { .. } => "a1",
            PipelineCase::A2 => "a2",
            PipelineCase::A3 { .. } => "a3",
            PipelineCase::A4 { .. } => "a4",
        }
    }
}

fn strong_conclusions(a: &PipelineSide, b: &PipelineSide, tol: f64) -> Result<(f64, f64)> {
    let t1 = tilde_data(&a.weyl, &a.spec)?;
    let t2 = tilde_data(&b.weyl, &b.spec)?;
    let zero = linalg::zeros(t1.b.nrows(), t1.b.nrows());
    let measure = measures::atom_residual(&t1.measure, &t2.measure, tol)
        .max(measures::density_residual(&t1.measure, &t2.measure, &zero));
    let im_b = (linalg::im_part(&t1.b) - linalg::im_part(&t2.b)).norm();
    Ok((measure, im_b))
}

/// Checks the case hypothesis; `Ok(None)` when it holds, otherwise the reason.
fn case_hypothesis(
    r: &mut ScenarioReport,
    a: &PipelineSide,
    b: &PipelineSide,
    upper: &[Complex64],
    lower: &[Complex64],
    case: &PipelineCase,
    tol: f64,
) -> Result<Option<String>> {
    match case {
        PipelineCase::A1 { window: (lo, hi) } => {
            let eq: Vec<bool> = [a, b]
                .iter()
                .map(|s| tilde_data(&s.weyl, &s.spec).map(|t| t.measure.lebesgue_equivalent_on(*lo, *hi, tol)))
                .collect::<Result<_>>()?;
            r.note(format!("(a1) checked on the window [{lo}, {hi}] as a finite proxy"));
            if eq.iter().any(|&e| e) {
                return Ok(Some(format!(
                    "hypothesis (a1) violated: the ac part is Lebesgue-equivalent on [{lo}, {hi}]"
                )));
            }
        }
        PipelineCase::A3 { window: (lo, hi) } => {
            let cover: Vec<bool> = [a, b]
                .iter()
                .map(|s| tilde_data(&s.weyl, &s.spec).map(|t| t.measure.ac_support_covers(*lo, *hi, tol)))
                .collect::<Result<_>>()?;
            r.note(format!("(a3) checked on the window [{lo}, {hi}] as a finite proxy"));
            if cover.iter().any(|&e| e) {
                return Ok(Some(format!("hypothesis (a3) violated: the ac support covers [{lo}, {hi}]")));
            }
        }
        PipelineCase::A2 => {
            if lower.is_empty() {
                return Ok(Some("hypothesis (a2) violated: no probes in C-".into()));
            }
            let full = full_equality_check(&a.weyl, &a.spec, &b.weyl, &b.spec, upper, lower, tol)?;
            r.check("lower_transform_equality", full.lower_residual, tol);
            if !full.lower_set_nonempty() {
                return Ok(Some("hypothesis (a2) violated: Omega- is empty".into()));
            }
            if full.lower_residual > tol {
                return Ok(Some("hypothesis (a2) violated: transforms differ on C-".into()));
            }
        }
        PipelineCase::A4 { t0, ys } => {
            let f1 = a.weyl.congruence(a.spec.k_inv());
            let f2 = b.weyl.congruence(b.spec.k_inv());
            let w = weak_derivative_check(&f1, &f2, *t0, ys, tol)?;
            r.check("weak_derivative_difference", w.difference, tol);
            if !w.equal() {
                return Ok(Some(format!("hypothesis (a4) violated: weak derivatives differ at {t0}")));
            }
        }
    }
    Ok(None)
}

/// The hat model of (model, spec) and the system (Ã, K, 0) it realizes.
///
/// The transfer function of that system is K*(Re B − M(z))⁻¹K.
pub fn hat_system(model: &OrdinaryTripletModel, spec: &WeylTransformSpec) -> Result<(OrdinaryTripletModel, PqsSystem)> {
    let hat = model.hat_transform(spec.k(), spec.b())?;
    let k = hat.base().k();
    let a = hat.extension_matrix(&linalg::zeros(k, k));
    let sys = PqsSystem::new(a, hat.input_map(), linalg::zeros(k, k), model.base().tol())?;
    Ok((hat, sys))
}

/// Equal K,B-transforms plus one of (a1)–(a4) ⇒ the hat triplets are unitarily equivalent.
///
/// Probes in ℂ₊ test the transform equality; probes in ℂ₋ are used by case (a2).
/// With finite models on both sides the unitary is constructed and its intertwining
/// of A₀, A_B and the hat boundary maps is checked.
pub fn uniqueness_pipeline(
    a: &PipelineSide,
    b: &PipelineSide,
    probes: &[Complex64],
    case: &PipelineCase,
    tol: f64,
) -> Result<ScenarioReport> {
    check_tol(tol)?;
    let upper: Vec<Complex64> = probes.iter().copied().filter(|z| z.im > 0.0).collect();
    let lower: Vec<Complex64> = probes.iter().copied().filter(|z| z.im < 0.0).collect();
    if upper.is_empty() {
        return Err(Error::Empty("upper probe set"));
    }
    let mut r = ScenarioReport::new(format!("uniqueness_{}", case.label()));
    let lemma = basic_lemma_check(&a.weyl, &a.spec, &b.weyl, &b.spec, &upper, tol)?;
    if !r.check("transform_equality", lemma.transform_residual, tol) {
        r.note("transforms differ on C+; the uniqueness conclusion does not apply");
        return Ok(r);
    }
    if let Some(reason) = case_hypothesis(&mut r, a, b, &upper, &lower, case, tol)? {
        r.flag(format!("hypothesis_{}", case.label()), false);
        r.note(reason);
        return Ok(r);
    }
    r.flag(format!("hypothesis_{}", case.label()), true);
    let (measure, im_b) = strong_conclusions(a, b, tol)?;
    r.check("tilde_measure_equality", measure, tol);
    r.check("im_b_tilde_equality", im_b, tol);

    let (Some(m1), Some(m2)) = (&a.model, &b.model) else {
        r.note("no finite models supplied; similarity step skipped");
        return Ok(r);
    };
    let (hat1, sys1) = hat_system(m1, &a.spec)?;
    let (hat2, sys2) = hat_system(m2, &b.spec)?;
    let mut hat_gap: f64 = 0.0;
    for &z in &upper {
        let (w1, w2) = (hat1.weyl(z)?, hat2.weyl(z)?);
        hat_gap = hat_gap.max((&w1 - w2).norm() / w1.norm().max(1.0));
    }
    r.check("hat_weyl_equality", hat_gap, tol);
    let sim_tol = tol.max(1e-8);
    let u = match decide_unitary_similarity(&sys1, &sys2, sim_tol) {
        Ok(Similarity::Equivalent(u)) => u,
        Ok(Similarity::NotEquivalent(why)) => {
            r.flag("unitary_similarity", false);
            r.note(format!("systems not similar: {why}"));
            return Ok(r);
        }
        Err(Error::NotSimple { rank, dim }) => {
            r.flag("simple", false);
            r.note(format!("symmetric part is not simple (Krylov rank {rank} of {dim})"));
            return Ok(r);
        }
        Err(e) => return Err(e),
    };
    r.flag("unitary_similarity", true);
    let res = verify_similarity(&sys1, &sys2, &u)?;
    r.check("similarity_residual", res.max(), 1e-8);
    let t1 = m1.triplet();
    let t2 = m2.triplet();
    let a0 = t1.reference_extension().transform(&u)?.distance(&t2.reference_extension());
    r.check("a0_intertwined", a0, 1e-8);
    let ab1 = t1.extension(a.spec.b())?.transform(&u)?;
    let ab2 = t2.extension(b.spec.b())?;
    r.check("a_b_intertwined", ab1.distance(&ab2), 1e-8);
    let n = u.nrows();
    let z = linalg::zeros(n, n);
    let uu = linalg::block2(&u, &z, &z, &u);
    let star = t1.adjoint_basis();
    let maps = ((hat2.gamma0() * &uu - hat1.gamma0()) * star)
        .norm()
        .max(((hat2.gamma1() * &uu - hat1.gamma1()) * star).norm());
    r.check("hat_maps_intertwined", maps, 1e-8);
    r.unitary = Some(u);
    Ok(r)
}

/// Hook for candidate instances of a selfadjoint B₁ and an accumulative B₂ with equal
/// transforms: reports the hypotheses and whether A_{B₁}, A_{B₂} can be unitarily similar.
/// No instance is shipped as ground truth.
pub fn remark_candidate(
    a: &PipelineSide,
    b: &PipelineSide,
    probes: &[Complex64],
    tol: f64,
) -> Result<ScenarioReport> {
    check_tol(tol)?;
    let upper: Vec<Complex64> = probes.iter().copied().filter(|z| z.im > 0.0).collect();
    if upper.is_empty() {
        return Err(Error::Empty("upper probe set"));
    }
    let mut r = ScenarioReport::new("remark_candidate");
    let lemma = basic_lemma_check(&a.weyl, &a.spec, &b.weyl, &b.spec, &upper, tol)?;
    r.check("transform_equality", lemma.transform_residual, tol);
    r.check("b1_selfadjoint", linalg::hermitian_residual(a.spec.b()), tol);
    let im2 = linalg::im_part(b.spec.b());
    let top = linalg::eigh(&im2).0.last().copied().unwrap_or(0.0);
    r.flag("b2_accumulative", top <= tol);
    r.flag("b2_not_selfadjoint", linalg::norm2(&im2) > tol);
    if let (Some(m1), Some(m2)) = (&a.model, &b.model) {
        let e1 = m1.triplet().extension(a.spec.b())?;
        let e2 = m2.triplet().extension(b.spec.b())?;
        r.flag("extensions_not_similar", e1.is_selfadjoint(tol.sqrt()) != e2.is_selfadjoint(tol.sqrt()));
    } else {
        r.note("no finite models supplied; extension comparison skipped");
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{scalar, DEFAULT_TOL};
    use crate::measures::{Atom, MatrixMeasure};
    use crate::triplets::{conjugate_model, random_model};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = DEFAULT_TOL;

    fn inverse_z() -> HerglotzMatrixFunction {
        let m = MatrixMeasure::atomic(1, vec![Atom { point: 0.0, weight: linalg::eye(1) }], TOL).unwrap();
        HerglotzMatrixFunction::from_measure(m, TOL).unwrap()
    }

    #[test]
    fn report_rendering() {
        let mut r = ScenarioReport::new("demo");
        r.check("a", 0.1 + 0.2, 1.0);
        r.flag("b", true);
        r.note("hello");
        let text = r.render();
        assert!(text.starts_with("scenario = demo\nverdict = pass\nchecks = 2\n"));
        assert!(text.contains("check.a.residual = 3.0000000000000004e-1\n"));
        assert!(text.contains("note.0 = hello\n"));
        r.check("c", 2.0, 1.0);
        assert!(!r.verdict());
        assert_eq!(r.failed().len(), 1);
    }

    #[test]
    fn momentum_counterexample() {
        let m1 = HerglotzMatrixFunction::imaginary_constant(linalg::eye(2), TOL).unwrap();
        let b1 = scalar(2, c(0.0, -1.0));
        let ce = construct_counterexample(&m1, &b1, c(0.0, 1.0), TOL).unwrap();
        assert_eq!(ce.upper, UpperSet::HalfPlane);
        assert!(linalg::min_eigenvalue(&linalg::im_part(&ce.b2)) > 0.0);
        let r = counterexample_report(&m1, &b1, c(0.0, 1.0), &momentum_grid(), TOL).unwrap();
        assert!(r.verdict(), "{}", r.render());
    }

    #[test]
    fn scalar_counterexample() {
        let m1 = inverse_z();
        let b1 = linalg::zeros(1, 1);
        let ce = construct_counterexample(&m1, &b1, c(0.0, 1.0), TOL).unwrap();
        assert!((ce.b[(0, 0)] - c(1.0, 1.0)).norm() < 1e-15);
        assert_eq!(ce.upper, UpperSet::HalfPlaneMinusZeros);
        let z = c(0.7, 0.4);
        let w2 = ce.m2.evaluate(z).unwrap()[(0, 0)];
        assert!((w2 - (-1.0 / z + c(1.0, 1.0))).norm() < 1e-14);
        let r = counterexample_report(&m1, &b1, c(0.0, 1.0), &momentum_grid(), TOL).unwrap();
        assert!(r.verdict(), "{}", r.render());
    }

    #[test]
    fn counterexample_rejects_singular_start() {
        let m1 = HerglotzMatrixFunction::imaginary_constant(linalg::eye(1), TOL).unwrap();
        let b1 = scalar(1, c(0.0, 1.0));
        assert!(matches!(
            construct_counterexample(&m1, &b1, c(0.0, 1.0), TOL),
            Err(Error::SingularAt { .. })
        ));
    }

    #[test]
    fn small_im_b1_succeeds() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m1 = HerglotzMatrixFunction::new(
            linalg::random_hermitian(2, &mut rng),
            linalg::zeros(2, 2),
            MatrixMeasure::zero(2),
            linalg::eye(2) * c(2.0, 0.0),
            TOL,
        )
        .unwrap();
        let eps0 = m1.strictness().unwrap();
        let im = linalg::random_hermitian(2, &mut rng);
        let im = &im * c(0.5 * eps0 / linalg::norm2(&im), 0.0);
        let b1 = linalg::random_hermitian(2, &mut rng) + im * c(0.0, 1.0);
        let r = counterexample_report(&m1, &b1, c(0.0, 1.0), &momentum_grid(), TOL).unwrap();
        assert!(r.verdict(), "{}", r.render());
    }

    #[test]
    fn golden_momentum_passes() {
        let r = momentum_golden().unwrap();
        assert!(r.verdict(), "{}", r.render());
        assert_eq!(r.checks.len(), 9);
    }

    #[test]
    fn momentum_violates_a1_and_a2() {
        let [(m1, s1), (m2, s2)] = momentum_pair(1, TOL).unwrap();
        let a = PipelineSide::from_function(m1, s1);
        let b = PipelineSide::from_function(m2, s2);
        let grid = momentum_grid();
        let r = uniqueness_pipeline(&a, &b, &grid, &PipelineCase::A1 { window: (-2.0, 2.0) }, 1e-10).unwrap();
        assert!(!r.verdict());
        assert!(r.notes.iter().any(|n| n.contains("(a1) violated")), "{}", r.render());
        let both: Vec<Complex64> = grid.iter().flat_map(|&z| [z, z.conj()]).collect();
        let r = uniqueness_pipeline(&a, &b, &both, &PipelineCase::A2, 1e-10).unwrap();
        assert!(r.notes.iter().any(|n| n.contains("(a2) violated")), "{}", r.render());
        let r = uniqueness_pipeline(&a, &b, &grid, &PipelineCase::A3 { window: (-2.0, 2.0) }, 1e-10).unwrap();
        assert!(r.notes.iter().any(|n| n.contains("(a3) violated")));
    }

    fn conjugate_pair(seed: u64) -> (PipelineSide, PipelineSide) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m1 = random_model(5, 2, seed, TOL).unwrap();
        let (vd, vn, w) = (
            linalg::random_unitary(3, &mut rng),
            linalg::random_unitary(2, &mut rng),
            linalg::random_unitary(2, &mut rng),
        );
        let m2 = conjugate_model(&m1, &vd, &vn, &w).unwrap();
        let b1 = linalg::random_hermitian(2, &mut rng) + linalg::random_psd(2, 2, &mut rng) * c(0.0, 1.0);
        let k1 = linalg::random_complex(2, 2, &mut rng) + linalg::eye(2);
        let s1 = WeylTransformSpec::new(b1.clone(), k1.clone(), TOL).unwrap();
        let s2 = WeylTransformSpec::new(w.adjoint() * b1 * &w, w.adjoint() * k1, TOL).unwrap();
        (PipelineSide::from_model(m1, s1).unwrap(), PipelineSide::from_model(m2, s2).unwrap())
    }

    #[test]
    fn conjugate_models_are_identified() {
        let (a, b) = conjugate_pair(4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let probes: Vec<Complex64> = (0..10).map(|_| c(rng.random_range(-3.0..3.0), rng.random_range(0.2..2.0))).collect();
        let cases = [
            PipelineCase::A1 { window: (-2.0, 2.0) },
            PipelineCase::A3 { window: (-2.0, 2.0) },
            PipelineCase::A4 { t0: 17.0, ys: vec![0.1, 0.05, 0.025, 0.0125] },
        ];
        for case in cases {
            let r = uniqueness_pipeline(&a, &b, &probes, &case, 1e-8).unwrap();
            assert!(r.verdict(), "{}", r.render());
            assert!(r.unitary.is_some());
        }
    }

    #[test]
    fn different_models_are_rejected() {
        let (a, _) = conjugate_pair(4);
        let (b, _) = conjugate_pair(5);
        let r = uniqueness_pipeline(&a, &b, &momentum_grid(), &PipelineCase::A1 { window: (-2.0, 2.0) }, 1e-8).unwrap();
        assert!(!r.verdict());
        assert!(r.unitary.is_none());
    }

    #[test]
    fn remark_hook_reports_hypotheses() {
        let (a, b) = conjugate_pair(7);
        let r = remark_candidate(&a, &b, &momentum_grid(), 1e-8).unwrap();
        assert!(r.checks.iter().any(|ch| ch.label == "b2_accumulative"));
        assert!(!r.verdict());
    }
}
