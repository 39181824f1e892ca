//! Matrix Herglotz functions, the transform K*(B − F(z))⁻¹K and its consequences.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{check_tol, Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::measures::{self, MatrixMeasure};

/// A k×k matrix-valued function that can be evaluated off the real line.
pub trait MatrixFunction {
    fn dim(&self) -> usize;
    fn eval(&self, z: Complex64) -> Result<CMatrix>;
}

/// Adapts a closure to [`MatrixFunction`].
pub struct FnMatrixFunction<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(Complex64) -> Result<CMatrix>> FnMatrixFunction<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnMatrixFunction { dim, f }
    }
}

impl<F: Fn(Complex64) -> Result<CMatrix>> MatrixFunction for FnMatrixFunction<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, z: Complex64) -> Result<CMatrix> {
        (self.f)(z)
    }
}

/// F(z) = C + Dz + ∫ (1/(t−z) − t/(1+t²)) dΣ(t) ± iS, the sign following Im z.
///
/// The shift S is a constant imaginary part on each half-plane; it carries the
/// ac density S/π on the whole line.
#[derive(Debug, Clone, PartialEq)]
pub struct HerglotzMatrixFunction {
    c: CMatrix,
    d: CMatrix,
    measure: MatrixMeasure,
    shift: CMatrix,
    tol: f64,
}

impl HerglotzMatrixFunction {
    pub fn new(c0: CMatrix, d: CMatrix, measure: MatrixMeasure, shift: CMatrix, tol: f64) -> Result<Self> {
        check_tol(tol)?;
        let k = measure.dim();
        for (m, what) in [(&c0, "C"), (&d, "D"), (&shift, "S")] {
            if m.nrows() != k || m.ncols() != k {
                return Err(Error::Dimension(format!("{what} is {}x{}, expected {k}x{k}", m.nrows(), m.ncols())));
            }
        }
        linalg::check_hermitian(&c0, tol)?;
        linalg::check_psd(&d, tol)?;
        linalg::check_psd(&shift, tol)?;
        Ok(HerglotzMatrixFunction { c: c0, d, measure, shift, tol })
    }

    pub fn from_measure(measure: MatrixMeasure, tol: f64) -> Result<Self> {
        let k = measure.dim();
        Self::new(linalg::zeros(k, k), linalg::zeros(k, k), measure, linalg::zeros(k, k), tol)
    }

    /// The constant function C₀ (Hermitian).
    pub fn constant(c0: CMatrix, tol: f64) -> Result<Self> {
        let k = c0.nrows();
        Self::new(c0, linalg::zeros(k, k), MatrixMeasure::zero(k), linalg::zeros(k, k), tol)
    }

    /// iS on ℂ₊ and −iS on ℂ₋.
    pub fn imaginary_constant(s: CMatrix, tol: f64) -> Result<Self> {
        let k = s.nrows();
        Self::new(linalg::zeros(k, k), linalg::zeros(k, k), MatrixMeasure::zero(k), s, tol)
    }

    pub fn c(&self) -> &CMatrix {
        &self.c
    }

    pub fn d(&self) -> &CMatrix {
        &self.d
    }

    pub fn measure(&self) -> &MatrixMeasure {
        &self.measure
    }

    pub fn shift(&self) -> &CMatrix {
        &self.shift
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn evaluate(&self, z: Complex64) -> Result<CMatrix> {
        if z.im == 0.0 && self.shift.norm() > 0.0 {
            return Err(Error::OnSupport(z));
        }
        let mut out = &self.c + &self.d * z + self.measure.cauchy_transform(z, self.tol)?;
        if z.im != 0.0 {
            out += &self.shift * c(0.0, z.im.signum());
        }
        Ok(out)
    }

    /// Σ together with the line density S/π.
    pub fn full_measure(&self) -> MatrixMeasure {
        self.measure.add_line_density(&(&self.shift / c(PI, 0.0)))
    }

    /// z ↦ T F(z) T*.
    pub fn congruence(&self, t: &CMatrix) -> HerglotzMatrixFunction {
        let cong = |m: &CMatrix| t * m * t.adjoint();
        HerglotzMatrixFunction {
            c: cong(&self.c),
            d: cong(&self.d),
            measure: self.measure.congruence(t),
            shift: cong(&self.shift),
            tol: self.tol,
        }
    }

    /// The function equal to F(z) + B on ℂ₊ (and F(z) + B* on ℂ₋); needs Im B ⪰ 0.
    pub fn add_constant(&self, b: &CMatrix) -> Result<HerglotzMatrixFunction> {
        let im = linalg::im_part(b);
        linalg::check_psd(&im, self.tol)?;
        Ok(HerglotzMatrixFunction {
            c: &self.c + linalg::re_part(b),
            shift: &self.shift + im,
            ..self.clone()
        })
    }

    /// Smallest eigenvalue of Im F(i); positive for the uniformly strict class.
    pub fn strictness(&self) -> Result<f64> {
        Ok(linalg::min_eigenvalue(&linalg::im_part(&self.evaluate(c(0.0, 1.0))?)))
    }
}

impl MatrixFunction for HerglotzMatrixFunction {
    fn dim(&self) -> usize {
        self.measure.dim()
    }

    fn eval(&self, z: Complex64) -> Result<CMatrix> {
        self.evaluate(z)
    }
}

/// Symmetry defect ‖F(z̄) − F(z)*‖ and smallest eigenvalue of Im F(z) over probes in ℂ₊.
pub fn herglotz_probe<F: MatrixFunction + ?Sized>(f: &F, probes: &[Complex64]) -> Result<(f64, f64)> {
    let mut sym: f64 = 0.0;
    let mut min_im = f64::INFINITY;
    for &z in probes {
        let v = f.eval(z)?;
        sym = sym.max((f.eval(z.conj())? - v.adjoint()).norm());
        min_im = min_im.min(linalg::min_eigenvalue(&linalg::im_part(&v)));
    }
    Ok((sym, min_im))
}

/// The pair (B, K) of the transform K*(B − F(z))⁻¹K.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylTransformSpec {
    b: CMatrix,
    k: CMatrix,
    k_inv: CMatrix,
    tol: f64,
}

impl WeylTransformSpec {
    pub fn new(b: CMatrix, k: CMatrix, tol: f64) -> Result<Self> {
        check_tol(tol)?;
        if b.nrows() != b.ncols() || k.nrows() != k.ncols() || b.nrows() != k.nrows() {
            return Err(Error::Dimension("B and K must be square of equal size".into()));
        }
        let k_inv = linalg::try_inverse(&k, "K", tol)?;
        Ok(WeylTransformSpec { b, k, k_inv, tol })
    }

    pub fn b(&self) -> &CMatrix {
        &self.b
    }

    pub fn k(&self) -> &CMatrix {
        &self.k
    }

    pub fn k_inv(&self) -> &CMatrix {
        &self.k_inv
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn dim(&self) -> usize {
        self.b.nrows()
    }

    pub fn re_b(&self) -> CMatrix {
        linalg::re_part(&self.b)
    }

    pub fn im_b(&self) -> CMatrix {
        linalg::im_part(&self.b)
    }

    /// K⁻¹ X K⁻¹*.
    pub fn tilde(&self, x: &CMatrix) -> CMatrix {
        &self.k_inv * x * self.k_inv.adjoint()
    }

    /// K⁻¹(X − Re B)K⁻¹*, the hat coordinate of a value or boundary operator.
    pub fn hat(&self, x: &CMatrix) -> CMatrix {
        self.tilde(&(x - self.re_b()))
    }
}

/// K*(B − F(z))⁻¹K.
pub fn weyl_transform<F: MatrixFunction + ?Sized>(f: &F, spec: &WeylTransformSpec, z: Complex64) -> Result<CMatrix> {
    let m = f.eval(z)?;
    if m.nrows() != spec.dim() {
        return Err(Error::Dimension("function and transform sizes differ".into()));
    }
    let inv = linalg::inverse_at(&(&spec.b - m), "B - F(z)", z, spec.tol)?;
    Ok(spec.k.adjoint() * inv * &spec.k)
}

/// Data of F and B after the congruence by K⁻¹; S is folded into Σ̃ as density S/π.
#[derive(Debug, Clone, PartialEq)]
pub struct TildeData {
    pub measure: MatrixMeasure,
    pub c: CMatrix,
    pub d: CMatrix,
    pub b: CMatrix,
}

pub fn tilde_data(f: &HerglotzMatrixFunction, spec: &WeylTransformSpec) -> Result<TildeData> {
    if f.dim() != spec.dim() {
        return Err(Error::Dimension("function and transform sizes differ".into()));
    }
    Ok(TildeData {
        measure: f.full_measure().congruence(spec.k_inv()),
        c: spec.tilde(f.c()),
        d: spec.tilde(f.d()),
        b: spec.tilde(spec.b()),
    })
}

/// Residuals of the equalities implied by equal transforms on an upper probe set.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    /// max over probes of ‖W₁(z) − W₂(z)‖ / max(1, ‖W₁(z)‖).
    pub transform_residual: f64,
    /// Atoms of Σ̃₁ against atoms of Σ̃₂.
    pub singular_residual: f64,
    /// Density of Σ̃₂ − Σ̃₁ against (Im B̃₂ − Im B̃₁)/π per unit length.
    pub ac_residual: f64,
    /// ‖C̃₁ − Re B̃₁ − C̃₂ + Re B̃₂‖.
    pub real_part_residual: f64,
    /// ‖D̃₁ − D̃₂‖.
    pub linear_residual: f64,
    pub tol: f64,
}

impl LemmaReport {
    pub fn transforms_agree(&self) -> bool {
        self.transform_residual <= self.tol
    }

    pub fn conclusions_hold(&self) -> bool {
        [self.singular_residual, self.ac_residual, self.real_part_residual, self.linear_residual]
            .iter()
            .all(|&r| r <= self.tol)
    }

    pub fn passed(&self) -> bool {
        self.transforms_agree() && self.conclusions_hold()
    }
}

fn transform_mismatch(
    f1: &HerglotzMatrixFunction,
    s1: &WeylTransformSpec,
    f2: &HerglotzMatrixFunction,
    s2: &WeylTransformSpec,
    z: Complex64,
) -> Result<f64> {
    let w1 = weyl_transform(f1, s1, z)?;
    let w2 = weyl_transform(f2, s2, z)?;
    Ok((&w1 - w2).norm() / w1.norm().max(1.0))
}

pub fn basic_lemma_check(
    f1: &HerglotzMatrixFunction,
    s1: &WeylTransformSpec,
    f2: &HerglotzMatrixFunction,
    s2: &WeylTransformSpec,
    probes: &[Complex64],
    tol: f64,
) -> Result<LemmaReport> {
    check_tol(tol)?;
    if probes.is_empty() {
        return Err(Error::Empty("probe set"));
    }
    if let Some(z) = probes.iter().find(|z| !(z.im > 0.0)) {
        return Err(Error::InvalidArgument(format!("probe {z} is not in the upper half-plane")));
    }
    let mut transform_residual: f64 = 0.0;
    for &z in probes {
        transform_residual = transform_residual.max(transform_mismatch(f1, s1, f2, s2, z)?);
    }
    let t1 = tilde_data(f1, s1)?;
    let t2 = tilde_data(f2, s2)?;
    let offset = (linalg::im_part(&t2.b) - linalg::im_part(&t1.b)) / c(PI, 0.0);
    Ok(LemmaReport {
        transform_residual,
        singular_residual: measures::atom_residual(&t1.measure, &t2.measure, tol),
        ac_residual: measures::density_residual(&t1.measure, &t2.measure, &offset),
        real_part_residual: (&t1.c - linalg::re_part(&t1.b) - &t2.c + linalg::re_part(&t2.b)).norm(),
        linear_residual: (&t1.d - &t2.d).norm(),
        tol,
    })
}

/// Residuals of the stronger conclusions available when the transforms agree
/// on probes in both half-planes.
#[derive(Debug, Clone, PartialEq)]
pub struct FullEqualityReport {
    pub upper: LemmaReport,
    /// Largest mismatch on lower probes where both transforms exist;
    /// infinite when exactly one side is singular at some probe.
    pub lower_residual: f64,
    /// Lower probes where both transforms exist.
    pub lower_defined: usize,
    /// Lower probes where exactly one transform exists.
    pub lower_one_sided: usize,
    /// Σ̃₁ against Σ̃₂ (atoms and densities).
    pub measure_residual: f64,
    /// ‖Im B̃₁ − Im B̃₂‖.
    pub im_b_residual: f64,
    pub tol: f64,
}

impl FullEqualityReport {
    /// Whether the lower probe set meets the common domain of both transforms.
    pub fn lower_set_nonempty(&self) -> bool {
        self.lower_defined > 0
    }

    pub fn passed(&self) -> bool {
        self.lower_set_nonempty()
            && self.lower_residual <= self.tol
            && self.upper.passed()
            && self.measure_residual <= self.tol
            && self.im_b_residual <= self.tol
    }
}

pub fn full_equality_check(
    f1: &HerglotzMatrixFunction,
    s1: &WeylTransformSpec,
    f2: &HerglotzMatrixFunction,
    s2: &WeylTransformSpec,
    upper: &[Complex64],
    lower: &[Complex64],
    tol: f64,
) -> Result<FullEqualityReport> {
    if lower.is_empty() {
        return Err(Error::Empty("lower probe set"));
    }
    if let Some(z) = lower.iter().find(|z| !(z.im < 0.0)) {
        return Err(Error::InvalidArgument(format!("probe {z} is not in the lower half-plane")));
    }
    let upper_report = basic_lemma_check(f1, s1, f2, s2, upper, tol)?;
    let (mut lower_residual, mut lower_defined, mut lower_one_sided) = (0.0f64, 0, 0);
    for &z in lower {
        match (weyl_transform(f1, s1, z), weyl_transform(f2, s2, z)) {
            (Ok(w1), Ok(w2)) => {
                lower_defined += 1;
                lower_residual = lower_residual.max((&w1 - w2).norm() / w1.norm().max(1.0));
            }
            (Err(Error::SingularAt { .. }), Err(Error::SingularAt { .. })) => {}
            (Err(Error::SingularAt { .. }), Ok(_)) | (Ok(_), Err(Error::SingularAt { .. })) => {
                lower_one_sided += 1;
                lower_residual = f64::INFINITY;
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    let t1 = tilde_data(f1, s1)?;
    let t2 = tilde_data(f2, s2)?;
    let zero = linalg::zeros(f1.dim(), f1.dim());
    let measure_residual = measures::atom_residual(&t1.measure, &t2.measure, tol)
        .max(measures::density_residual(&t1.measure, &t2.measure, &zero));
    Ok(FullEqualityReport {
        upper: upper_report,
        lower_residual,
        lower_defined,
        lower_one_sided,
        measure_residual,
        im_b_residual: (linalg::im_part(&t1.b) - linalg::im_part(&t2.b)).norm(),
        tol,
    })
}

/// Boundary densities estimated from (1/π) Im F(t₀ + iy) as y ↓ 0, next to the
/// densities the representations carry at t₀.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakDerivativeReport {
    pub estimated: [CMatrix; 2],
    pub represented: [CMatrix; 2],
    /// ‖estimated − represented‖ for each function.
    pub estimation_residual: [f64; 2],
    /// ‖estimated₁ − estimated₂‖.
    pub difference: f64,
    pub tol: f64,
}

impl WeakDerivativeReport {
    pub fn equal(&self) -> bool {
        self.difference <= self.tol
    }

    pub fn consistent(&self) -> bool {
        self.estimation_residual.iter().all(|&r| r <= self.tol)
    }
}

pub fn weak_derivative_check(
    f1: &HerglotzMatrixFunction,
    f2: &HerglotzMatrixFunction,
    t0: f64,
    ys: &[f64],
    tol: f64,
) -> Result<WeakDerivativeReport> {
    check_tol(tol)?;
    if ys.is_empty() || ys.iter().any(|&y| !(y > 0.0)) {
        return Err(Error::InvalidArgument("y sequence must be nonempty and positive".into()));
    }
    let estimate = |f: &HerglotzMatrixFunction| -> Result<(CMatrix, CMatrix)> {
        if f.measure().atoms().iter().any(|a| (a.point - t0).abs() <= tol * t0.abs().max(1.0)) {
            return Err(Error::InvalidArgument(format!("t0 = {t0} is an atom")));
        }
        let vals = ys
            .iter()
            .map(|&y| f.evaluate(c(t0, y)).map(|m| linalg::im_part(&m) / c(PI, 0.0)))
            .collect::<Result<Vec<_>>>()?;
        let (est, _) = measures::extrapolate_to_zero(ys, &vals);
        Ok((est, f.full_measure().density_at(t0)))
    };
    let (e1, r1) = estimate(f1)?;
    let (e2, r2) = estimate(f2)?;
    Ok(WeakDerivativeReport {
        estimation_residual: [(&e1 - &r1).norm(), (&e2 - &r2).norm()],
        difference: (&e1 - &e2).norm(),
        estimated: [e1, e2],
        represented: [r1, r2],
        tol,
    })
}

/// Parameters of the integral representation recovered from values on ℂ₊.
#[derive(Debug, Clone)]
pub struct RecoveredParameters {
    pub c: CMatrix,
    pub d: CMatrix,
    pub measure: MatrixMeasure,
    pub d_error_estimate: f64,
    pub measure_error_estimate: f64,
    /// ‖F(z̄) − F(z)*‖ at a probe above the window centre.
    pub symmetry_residual: f64,
}

impl RecoveredParameters {
    pub fn converged(&self, tol: f64) -> bool {
        self.d_error_estimate <= tol && self.measure_error_estimate <= tol
    }
}

/// C = Re F(i), D = lim F(iy)/(iy), Σ by Stieltjes inversion over `cells`
/// equal cells of `window`.
pub fn recover_parameters<F: MatrixFunction + ?Sized>(
    f: &F,
    window: (f64, f64),
    cells: usize,
    tol: f64,
) -> Result<RecoveredParameters> {
    check_tol(tol)?;
    let i = c(0.0, 1.0);
    let c0 = linalg::re_part(&f.eval(i)?);
    let ys = [1e3, 2e3, 4e3, 8e3];
    let hs: Vec<f64> = ys.iter().map(|y| 1.0 / y).collect();
    let vals = ys
        .iter()
        .map(|&y| f.eval(c(0.0, y)).map(|m| linalg::re_part(&(m / c(0.0, y)))))
        .collect::<Result<Vec<_>>>()?;
    let (d, d_err) = measures::extrapolate_to_zero(&hs, &vals);
    let im_f = |x: f64, y: f64| f.eval(c(x, y)).map(|m| linalg::im_part(&m));
    let rec = measures::recover_measure(&im_f, window, cells, tol)?;
    let mid = c(0.5 * (window.0 + window.1), 1.0);
    let symmetry_residual = (f.eval(mid.conj())? - f.eval(mid)?.adjoint()).norm();
    Ok(RecoveredParameters {
        c: c0,
        d,
        measure: rec.measure,
        d_error_estimate: d_err,
        measure_error_estimate: rec.max_error_estimate,
        symmetry_residual,
    })
}

/// Blocks of X = [[X₁, X₂], [X₃, X₄]] for (X₃ + X₄F)(X₁ + X₂F)⁻¹.
#[derive(Debug, Clone, PartialEq)]
pub struct LftBlocks {
    pub x1: CMatrix,
    pub x2: CMatrix,
    pub x3: CMatrix,
    pub x4: CMatrix,
}

impl LftBlocks {
    pub fn identity(k: usize) -> Self {
        LftBlocks { x1: linalg::eye(k), x2: linalg::zeros(k, k), x3: linalg::zeros(k, k), x4: linalg::eye(k) }
    }

    /// Blocks for which the transform equals C + K*(B − F)⁻¹K:
    /// X₂ = −K⁻¹, X₁ = K⁻¹B, X₄ = −CK⁻¹, X₃ = X₄X₂⁻¹X₁ − X₂⁻¹* = CK⁻¹B + K*.
    pub fn from_transform(c0: &CMatrix, spec: &WeylTransformSpec) -> Self {
        let ki = spec.k_inv();
        LftBlocks {
            x1: ki * spec.b(),
            x2: -ki.clone(),
            x3: c0 * ki * spec.b() + spec.k().adjoint(),
            x4: -(c0 * ki),
        }
    }

    pub fn full(&self) -> CMatrix {
        linalg::block2(&self.x1, &self.x2, &self.x3, &self.x4)
    }
}

/// (X₃ + X₄F(z))(X₁ + X₂F(z))⁻¹.
pub fn lft_weyl<F: MatrixFunction + ?Sized>(f: &F, x: &LftBlocks, z: Complex64, tol: f64) -> Result<CMatrix> {
    check_tol(tol)?;
    let full = x.full();
    if full.nrows() != 2 * f.dim() {
        return Err(Error::Dimension("block size does not match the function".into()));
    }
    linalg::try_inverse(&full, "X", tol)?;
    let m = f.eval(z)?;
    let den = linalg::inverse_at(&(&x.x1 + &x.x2 * &m), "X1 + X2 F(z)", z, tol)?;
    Ok((&x.x3 + &x.x4 * m) * den)
}

/// W(z) = I + 2i K*(B* − F(z))⁻¹ K J.
pub fn characteristic_function<F: MatrixFunction + ?Sized>(
    f: &F,
    b: &CMatrix,
    k: &CMatrix,
    j: &CMatrix,
    z: Complex64,
    tol: f64,
) -> Result<CMatrix> {
    check_tol(tol)?;
    let m = f.eval(z)?;
    let inv = linalg::inverse_at(&(b.adjoint() - m), "B* - F(z)", z, tol)?;
    Ok(linalg::eye(k.ncols()) + k.adjoint() * inv * k * j * c(0.0, 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{scalar, DEFAULT_TOL};
    use crate::measures::{Atom, DensityPiece};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = DEFAULT_TOL;

    fn s(z: Complex64) -> CMatrix {
        scalar(1, z)
    }

    fn inverse_z() -> HerglotzMatrixFunction {
        let m = MatrixMeasure::atomic(1, vec![Atom { point: 0.0, weight: linalg::eye(1) }], TOL).unwrap();
        HerglotzMatrixFunction::from_measure(m, TOL).unwrap()
    }

    fn const_i(k: usize, v: f64) -> HerglotzMatrixFunction {
        HerglotzMatrixFunction::imaginary_constant(scalar(k, c(v, 0.0)), TOL).unwrap()
    }

    fn random_function(rng: &mut ChaCha8Rng, k: usize) -> HerglotzMatrixFunction {
        let atoms = (0..rng.random_range(1..4))
            .map(|i| Atom { point: i as f64 - 1.3, weight: linalg::random_psd(k, 1, rng) })
            .collect();
        let pieces = vec![DensityPiece { start: 2.0, end: 3.5, density: linalg::random_psd(k, k, rng) }];
        let m = MatrixMeasure::new(k, atoms, pieces, linalg::zeros(k, k), TOL).unwrap();
        HerglotzMatrixFunction::new(
            linalg::random_hermitian(k, rng),
            linalg::random_psd(k, 1, rng),
            m,
            linalg::random_psd(k, 1, rng) * c(0.3, 0.0),
            TOL,
        )
        .unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let i = c(0.0, 1.0);
        assert!((inverse_z().evaluate(i).unwrap() - s(i)).norm() < 1e-15);
        let f = const_i(2, 1.0);
        assert!((f.evaluate(c(3.0, 0.2)).unwrap() - scalar(2, i)).norm() < 1e-15);
        assert!((f.evaluate(c(3.0, -0.2)).unwrap() - scalar(2, -i)).norm() < 1e-15);
        let c0 = linalg::from_real(2, 2, &[1.0, 2.0, 2.0, -1.0]);
        let g = HerglotzMatrixFunction::constant(c0.clone(), TOL).unwrap();
        assert_eq!(g.evaluate(c(-7.0, 0.5)).unwrap(), c0);
        assert!(matches!(inverse_z().evaluate(c(0.0, 0.0)), Err(Error::OnSupport(_))));
    }

    #[test]
    fn momentum_transforms_agree() {
        let z = c(0.4, 1.2);
        let s1 = WeylTransformSpec::new(scalar(2, c(0.0, -1.0)), linalg::eye(2), TOL).unwrap();
        let s2 = WeylTransformSpec::new(scalar(2, c(0.0, 1.0)), linalg::eye(2), TOL).unwrap();
        let w1 = weyl_transform(&const_i(2, 1.0), &s1, z).unwrap();
        let w2 = weyl_transform(&const_i(2, 3.0), &s2, z).unwrap();
        let expected = scalar(2, c(1.0, 0.0) / c(0.0, -2.0));
        assert!((&w1 - &expected).norm() < 1e-15);
        assert!((w1[(0, 0)] - c(0.0, 0.5)).norm() < 1e-15);
        assert!((w1 - w2).norm() < 1e-15);
    }

    #[test]
    fn transform_examples() {
        let z = c(0.3, -0.8);
        let spec = WeylTransformSpec::new(s(c(0.0, 0.0)), linalg::eye(1), TOL).unwrap();
        assert!((weyl_transform(&inverse_z(), &spec, z).unwrap() - s(z)).norm() < 1e-14);
        let spec = WeylTransformSpec::new(scalar(2, c(0.0, 0.0)), scalar(2, c(2.0, 0.0)), TOL).unwrap();
        let w = weyl_transform(&const_i(2, 1.0), &spec, c(1.0, 1.0)).unwrap();
        assert!((w - scalar(2, c(0.0, 4.0))).norm() < 1e-14);
        let bad = WeylTransformSpec::new(s(c(0.0, 1.0)), linalg::eye(1), TOL).unwrap();
        let err = weyl_transform(&const_i(1, 1.0), &bad, c(0.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::SingularAt { z, .. } if z == c(0.0, 1.0)));
        assert!(WeylTransformSpec::new(s(c(0.0, 0.0)), s(c(0.0, 0.0)), TOL).is_err());
    }

    #[test]
    fn tilde_examples() {
        let f = inverse_z();
        let spec = WeylTransformSpec::new(s(c(1.0, 1.0)), s(c(2.0, 0.0)), TOL).unwrap();
        let t = tilde_data(&f, &spec).unwrap();
        assert!((t.measure.atoms()[0].weight[(0, 0)] - c(0.25, 0.0)).norm() < 1e-15);
        assert!((t.b[(0, 0)] - c(0.25, 0.25)).norm() < 1e-15);
        let id = WeylTransformSpec::new(s(c(1.0, 1.0)), linalg::eye(1), TOL).unwrap();
        let t = tilde_data(&f, &id).unwrap();
        assert_eq!(t.measure, *f.measure());
        assert_eq!(t.c, *f.c());
    }

    #[test]
    fn momentum_lemma_and_lower_half_plane() {
        let s1 = WeylTransformSpec::new(scalar(2, c(0.0, -1.0)), linalg::eye(2), TOL).unwrap();
        let s2 = WeylTransformSpec::new(scalar(2, c(0.0, 1.0)), linalg::eye(2), TOL).unwrap();
        let (f1, f2) = (const_i(2, 1.0), const_i(2, 3.0));
        let upper = [c(0.0, 1.0), c(1.0, 0.5), c(-2.0, 3.0)];
        let r = basic_lemma_check(&f1, &s1, &f2, &s2, &upper, 1e-12).unwrap();
        assert!(r.passed(), "{r:?}");
        let t1 = tilde_data(&f1, &s1).unwrap();
        let t2 = tilde_data(&f2, &s2).unwrap();
        let gap = linalg::im_part(&t2.b) - linalg::im_part(&t1.b);
        assert!((gap - scalar(2, c(2.0, 0.0))).norm() < 1e-15);
        let lower: Vec<Complex64> = upper.iter().map(|z| z.conj()).collect();
        let full = full_equality_check(&f1, &s1, &f2, &s2, &upper, &lower, 1e-12).unwrap();
        assert!(!full.passed());
        assert!(!full.lower_set_nonempty());
        assert_eq!(full.lower_one_sided, 3);
        assert!(basic_lemma_check(&f1, &s1, &f2, &s2, &[], 1e-12).is_err());
    }

    #[test]
    fn identical_inputs_pass_everywhere() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_function(&mut rng, 2);
        let spec = WeylTransformSpec::new(linalg::random_complex(2, 2, &mut rng), linalg::random_complex(2, 2, &mut rng), TOL)
            .unwrap();
        let up = [c(0.1, 1.0), c(2.0, 0.3)];
        let low = [c(0.1, -1.0), c(-1.0, -0.7)];
        let r = full_equality_check(&f, &spec, &f, &spec, &up, &low, 1e-12).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn unitary_reparametrization_passes_full_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f1 = random_function(&mut rng, 2);
        let k1 = linalg::random_complex(2, 2, &mut rng);
        let b1 = linalg::random_complex(2, 2, &mut rng);
        let u = linalg::random_unitary(2, &mut rng);
        // M₂ = T M₁ T*, B₂ = T B₁ T* with T = K₂K₁⁻¹ leaves the transform unchanged
        let k2 = &k1 * &u;
        let t = &k2 * k1.clone().try_inverse().unwrap();
        let f2 = f1.congruence(&t);
        let b2 = &t * &b1 * t.adjoint();
        let s1 = WeylTransformSpec::new(b1, k1, TOL).unwrap();
        let s2 = WeylTransformSpec::new(b2, k2, TOL).unwrap();
        let up = [c(0.1, 1.0), c(2.0, 0.3)];
        let low = [c(0.1, -1.0), c(-1.0, -0.7)];
        let r = full_equality_check(&f1, &s1, &f2, &s2, &up, &low, 1e-10).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn weak_derivative_examples() {
        let ys = [0.1, 0.05, 0.025, 0.0125];
        let (f1, f2) = (const_i(2, 1.0), const_i(2, 3.0));
        let r = weak_derivative_check(&f1, &f2, 0.5, &ys, 1e-9).unwrap();
        assert!(!r.equal());
        assert!(r.consistent());
        assert!((&r.estimated[0] - scalar(2, c(1.0 / PI, 0.0))).norm() < 1e-12);
        let g = inverse_z();
        let h = HerglotzMatrixFunction::constant(s(c(2.0, 0.0)), TOL).unwrap();
        let r = weak_derivative_check(&g, &h, 3.0, &ys, 1e-6).unwrap();
        assert!(r.equal() && r.consistent(), "{r:?}");
        assert!(weak_derivative_check(&g, &h, 0.0, &ys, 1e-6).is_err());
    }

    #[test]
    fn weighted_measures_have_zero_derivative() {
        use crate::measures::{weight_measure, PiecewiseLinear};
        let phi = PiecewiseLinear::new(vec![(-1.0, 1.0), (-0.05, 0.0), (0.05, 0.0), (1.0, 1.0)]).unwrap();
        let fs: Vec<HerglotzMatrixFunction> = [1.0, 3.0]
            .iter()
            .map(|&v| {
                let m = weight_measure(&MatrixMeasure::lebesgue(2, v / PI), &phi).unwrap();
                HerglotzMatrixFunction::from_measure(m, TOL).unwrap()
            })
            .collect();
        let ys = [2e-3, 1e-3, 5e-4, 2.5e-4];
        let r = weak_derivative_check(&fs[0], &fs[1], 0.0, &ys, 1e-6).unwrap();
        assert!(r.represented[0].norm() == 0.0 && r.represented[1].norm() == 0.0);
        assert!(r.equal() && r.consistent(), "{r:?}");
    }

    #[test]
    fn recover_examples() {
        let lin = FnMatrixFunction::new(1, |z: Complex64| Ok(s(z)));
        let r = recover_parameters(&lin, (-1.0, 1.0), 5, 1e-4).unwrap();
        assert!((&r.d - linalg::eye(1)).norm() < 1e-6 && r.c.norm() < 1e-12 && r.measure.is_zero());
        let r = recover_parameters(&inverse_z(), (-1.0, 1.0), 5, 1e-4).unwrap();
        assert!(r.d.norm() < 1e-6);
        assert_eq!(r.measure.atoms().len(), 1);
        assert!((r.measure.atoms()[0].weight[(0, 0)].re - 1.0).abs() < 1e-3);
        let c0 = linalg::from_real(2, 2, &[0.5, 1.0, 1.0, -2.0]);
        let k = HerglotzMatrixFunction::constant(c0.clone(), TOL).unwrap();
        let r = recover_parameters(&k, (-1.0, 1.0), 4, 1e-4).unwrap();
        assert!((r.c - c0).norm() < 1e-12);
    }

    #[test]
    fn lft_examples() {
        let f = inverse_z();
        let z = c(0.2, 0.9);
        let v = lft_weyl(&f, &LftBlocks::identity(1), z, TOL).unwrap();
        assert!((v - f.evaluate(z).unwrap()).norm() < 1e-15);
        let b = s(c(0.5, -0.25));
        let spec = WeylTransformSpec::new(b.clone(), linalg::eye(1), TOL).unwrap();
        let x = LftBlocks::from_transform(&linalg::zeros(1, 1), &spec);
        assert_eq!(x.x2, -linalg::eye(1));
        assert_eq!(x.x1, b);
        assert_eq!(x.x3, linalg::eye(1));
        let lhs = lft_weyl(&f, &x, z, TOL).unwrap();
        assert!((lhs - weyl_transform(&f, &spec, z).unwrap()).norm() < 1e-12);
        let ci = HerglotzMatrixFunction::imaginary_constant(linalg::eye(1), TOL).unwrap();
        let xs = LftBlocks { x1: s(c(2.0, 1.0)), x2: s(c(0.5, 0.0)), x3: s(c(-1.0, 0.0)), x4: s(c(3.0, -2.0)) };
        let got = lft_weyl(&ci, &xs, c(0.0, 1.0), TOL).unwrap()[(0, 0)];
        let i = c(0.0, 1.0);
        let want = (c(-1.0, 0.0) + c(3.0, -2.0) * i) / (c(2.0, 1.0) + c(0.5, 0.0) * i);
        assert!((got - want).norm() < 1e-14);
    }

    #[test]
    fn characteristic_examples() {
        let f = const_i(2, 3.0);
        let w = characteristic_function(&f, &scalar(2, c(0.0, 1.0)), &linalg::eye(2), &linalg::eye(2), c(1.0, 1.0), TOL)
            .unwrap();
        assert!((w - scalar(2, c(0.5, 0.0))).norm() < 1e-15);
        // B* − F = −2i
        let g = const_i(1, 1.0);
        let b = s(c(0.0, 1.0));
        let w = characteristic_function(&g, &b, &linalg::eye(1), &linalg::eye(1), c(0.0, 1.0), TOL).unwrap();
        assert!(w.norm() < 1e-15);
        let w = characteristic_function(&g, &b, &s(c(1e-6, 0.0)), &linalg::eye(1), c(0.0, 1.0), TOL).unwrap();
        assert!((w - linalg::eye(1)).norm() < 1e-11);
    }

    proptest! {
        #[test]
        fn constructed_functions_are_herglotz(seed in any::<u64>(), x in -3.0f64..3.0, y in 0.01f64..4.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_function(&mut rng, 3);
            let (sym, min_im) = herglotz_probe(&f, &[c(x, y)]).unwrap();
            prop_assert!(sym < 1e-12);
            prop_assert!(min_im > -1e-12);
        }

        #[test]
        fn lemma_conclusions_follow_from_shared_tilde_data(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f1 = random_function(&mut rng, 2);
            let k1 = linalg::random_complex(2, 2, &mut rng);
            let b1 = linalg::random_complex(2, 2, &mut rng);
            let s1 = WeylTransformSpec::new(b1, k1.clone(), TOL).unwrap();
            // second side: F₂ = F₁ + B₂ − B₁ on ℂ₊ with Im B₂ ⪰ Im B₁, same K
            let extra = linalg::random_hermitian(2, &mut rng) + linalg::random_psd(2, 2, &mut rng) * c(0.0, 1.0);
            let f2 = f1.add_constant(&extra).unwrap();
            let s2 = WeylTransformSpec::new(s1.b() + &extra, k1, TOL).unwrap();
            let probes = [c(0.3, 0.7), c(-1.0, 2.0), c(4.0, 0.1)];
            let r = basic_lemma_check(&f1, &s1, &f2, &s2, &probes, 1e-9).unwrap();
            prop_assert!(r.passed(), "{:?}", r);
        }

        #[test]
        fn double_transform_recovers_shifted_function(seed in any::<u64>(), x in -2.0f64..2.0, y in 0.1f64..2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_function(&mut rng, 2);
            let b = linalg::random_complex(2, 2, &mut rng);
            let spec = WeylTransformSpec::new(b.clone(), linalg::eye(2), TOL).unwrap();
            let once = FnMatrixFunction::new(2, |z| weyl_transform(&f, &spec, z));
            let zero = WeylTransformSpec::new(linalg::zeros(2, 2), linalg::eye(2), TOL).unwrap();
            let z = c(x, y);
            let twice = weyl_transform(&once, &zero, z).unwrap();
            let want = f.evaluate(z).unwrap() - b;
            prop_assert!((&twice - &want).norm() < 1e-8 * want.norm().max(1.0));
        }

        #[test]
        fn constrained_lft_matches_transform(seed in any::<u64>(), x in -2.0f64..2.0, y in 0.1f64..2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_function(&mut rng, 2);
            let spec = WeylTransformSpec::new(linalg::random_complex(2, 2, &mut rng), linalg::random_complex(2, 2, &mut rng), TOL).unwrap();
            let c0 = linalg::random_hermitian(2, &mut rng);
            let z = c(x, y);
            let lhs = lft_weyl(&f, &LftBlocks::from_transform(&c0, &spec), z, TOL).unwrap();
            let rhs = &c0 + weyl_transform(&f, &spec, z).unwrap();
            prop_assert!((&lhs - &rhs).norm() < 1e-12 * rhs.norm().max(1.0) * 1e3);
        }

        #[test]
        fn recover_round_trip(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w: f64 = rng.random_range(0.2..2.0);
            let m = MatrixMeasure::atomic(1, vec![Atom { point: 0.1, weight: s(c(w, 0.0)) }], TOL).unwrap();
            let cc: f64 = rng.random_range(-1.0..1.0);
            let dd: f64 = rng.random_range(0.0..1.0);
            let f = HerglotzMatrixFunction::new(s(c(cc, 0.0)), s(c(dd, 0.0)), m, linalg::zeros(1, 1), TOL).unwrap();
            let r = recover_parameters(&f, (-1.0, 1.0), 5, 1e-5).unwrap();
            prop_assert!((r.c[(0, 0)].re - cc).abs() < 1e-3);
            prop_assert!((r.d[(0, 0)].re - dd).abs() < 1e-3);
            prop_assert_eq!(r.measure.atoms().len(), 1);
            prop_assert!((r.measure.atoms()[0].weight[(0, 0)].re - w).abs() < 1e-3 * w);
        }
    }
}
