//! Dense complex matrix helpers shared by every module.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

fn to_faer(m: &CMatrix) -> faer::Mat<Complex64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, Complex64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Default relative tolerance for rank and singularity decisions.
pub const DEFAULT_TOL: f64 = 1e-10;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn eye(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMatrix {
    CMatrix::zeros(r, c)
}

pub fn scalar(n: usize, s: Complex64) -> CMatrix {
    eye(n) * s
}

pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| c(x, 0.0)))
}

pub fn diag_real(values: &[f64]) -> CMatrix {
    let mut m = zeros(values.len(), values.len());
    for (i, &v) in values.iter().enumerate() {
        m[(i, i)] = c(v, 0.0);
    }
    m
}

/// (M + M*)/2
pub fn re_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// (M − M*)/(2i)
pub fn im_part(m: &CMatrix) -> CMatrix {
    (m - m.adjoint()) * c(0.0, -0.5)
}

pub fn hstack(blocks: &[&CMatrix]) -> CMatrix {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack row mismatch");
        out.view_mut((0, at), (rows, b.ncols())).copy_from(*b);
        at += b.ncols();
    }
    out
}

pub fn vstack(blocks: &[&CMatrix]) -> CMatrix {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack column mismatch");
        out.view_mut((at, 0), (b.nrows(), cols)).copy_from(*b);
        at += b.nrows();
    }
    out
}

/// 2×2 block matrix [[a, b], [c, d]].
pub fn block2(a: &CMatrix, b: &CMatrix, cc: &CMatrix, d: &CMatrix) -> CMatrix {
    vstack(&[&hstack(&[a, b]), &hstack(&[cc, d])])
}

pub fn rows(m: &CMatrix, start: usize, count: usize) -> CMatrix {
    m.rows(start, count).into_owned()
}

pub fn cols(m: &CMatrix, start: usize, count: usize) -> CMatrix {
    m.columns(start, count).into_owned()
}

/// Singular values in decreasing order; empty for empty matrices.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s = to_faer(m).singular_values().expect("svd converges");
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Spectral norm.
pub fn norm2(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Smallest singular value of a square matrix (0 for the empty matrix is never returned: it is +inf).
pub fn sigma_min(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    let s = singular_values(m);
    if m.nrows() != m.ncols() {
        return if s.len() < m.nrows().max(m.ncols()) { 0.0 } else { *s.last().unwrap() };
    }
    *s.last().unwrap()
}

pub fn threshold(sigma_max: f64, tol: f64) -> f64 {
    tol * sigma_max.max(1.0)
}

pub fn rank(m: &CMatrix, tol: f64) -> usize {
    let s = singular_values(m);
    let thr = threshold(s.first().copied().unwrap_or(0.0), tol);
    s.iter().filter(|&&x| x > thr).count()
}

/// Minimum-norm least-squares solution of `m x = b`, singular values below eps·σ_max dropped.
pub fn lstsq(m: &CMatrix, b: &CMatrix) -> CMatrix {
    if m.nrows() == 0 || m.ncols() == 0 {
        return zeros(m.ncols(), b.ncols());
    }
    let svd = to_faer(m).thin_svd().expect("svd converges");
    let (u, v) = (from_faer(svd.U()), from_faer(svd.V()));
    let s = svd.S().column_vector();
    let smax = (0..s.nrows()).map(|i| s[i].re).fold(0.0, f64::max);
    let mut ub = u.adjoint() * b;
    for i in 0..s.nrows() {
        let si = s[i].re;
        let inv = if si > f64::EPSILON * smax { 1.0 / si } else { 0.0 };
        ub.row_mut(i).scale_mut(inv);
    }
    v * ub
}

/// Nearest unitary matrix (polar factor).
pub fn polar_unitary(m: &CMatrix) -> CMatrix {
    if m.nrows() == 0 {
        return m.clone();
    }
    let svd = to_faer(m).thin_svd().expect("svd converges");
    from_faer(svd.U()) * from_faer(svd.V()).adjoint()
}

/// Orthonormal basis of the column span.
pub fn orth(m: &CMatrix, tol: f64) -> CMatrix {
    if m.nrows() == 0 || m.ncols() == 0 {
        return zeros(m.nrows(), 0);
    }
    let svd = to_faer(m).thin_svd().expect("svd converges");
    let s = svd.S().column_vector();
    let smax = (0..s.nrows()).map(|i| s[i].re).fold(0.0, f64::max);
    let thr = threshold(smax, tol);
    let keep: Vec<usize> = (0..s.nrows()).filter(|&i| s[i].re > thr).collect();
    let u = from_faer(svd.U());
    let mut out = zeros(m.nrows(), keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &u.column(i));
    }
    out
}

/// Orthonormal basis of the orthogonal complement of the span of the orthonormal columns `q`.
pub fn complement(q: &CMatrix) -> CMatrix {
    let n = q.nrows();
    if q.ncols() == 0 {
        return eye(n);
    }
    if q.ncols() >= n {
        return zeros(n, 0);
    }
    let p = eye(n) - q * q.adjoint();
    let (values, vectors) = eigh(&p);
    let keep: Vec<usize> = (0..n).filter(|&i| values[i] > 0.5).collect();
    let mut out = zeros(n, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &vectors.column(i));
    }
    out
}

/// Orthonormal basis of the null space of `m` (a `ncols × nullity` matrix).
pub fn null_space(m: &CMatrix, tol: f64) -> CMatrix {
    if m.nrows() == 0 {
        return eye(m.ncols());
    }
    complement(&orth(&m.adjoint(), tol))
}

pub fn try_inverse(m: &CMatrix, what: &'static str, tol: f64) -> Result<CMatrix> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!("{what} is {}x{}, not square", m.nrows(), m.ncols())));
    }
    let s = singular_values(m);
    if s.is_empty() {
        return Ok(zeros(0, 0));
    }
    let smin = *s.last().unwrap();
    if smin <= threshold(s[0], tol) {
        return Err(Error::Singular { what, sigma: smin });
    }
    m.clone()
        .try_inverse()
        .ok_or(Error::Singular { what, sigma: smin })
}

/// Inverse at a spectral parameter, reporting `z` on failure.
pub fn inverse_at(m: &CMatrix, what: &'static str, z: Complex64, tol: f64) -> Result<CMatrix> {
    try_inverse(m, what, tol).map_err(|e| match e {
        Error::Singular { what, sigma } => Error::SingularAt { what, z, sigma },
        other => other,
    })
}

pub fn hermitian_residual(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

pub fn check_hermitian(m: &CMatrix, tol: f64) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension("expected a square matrix".into()));
    }
    let residual = hermitian_residual(m);
    if residual > tol * m.norm().max(1.0) {
        Err(Error::NotHermitian { residual })
    } else {
        Ok(())
    }
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let eig = to_faer(&re_part(m)).self_adjoint_eigen(faer::Side::Lower).expect("eigen converges");
    let s = eig.S().column_vector();
    let u = from_faer(eig.U());
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re));
    let values = idx.iter().map(|&i| s[i].re).collect();
    let mut vectors = zeros(n, n);
    for (j, &i) in idx.iter().enumerate() {
        vectors.set_column(j, &u.column(i));
    }
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    eigh(m).0.first().copied().unwrap_or(0.0)
}

pub fn check_psd(m: &CMatrix, tol: f64) -> Result<()> {
    check_hermitian(m, tol)?;
    let min_eigenvalue = min_eigenvalue(m);
    if min_eigenvalue < -tol * norm2(m).max(1.0) {
        Err(Error::NotPositive { min_eigenvalue })
    } else {
        Ok(())
    }
}

/// Eigenvalues of a general square matrix.
pub fn eigenvalues(m: &CMatrix) -> Vec<Complex64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    to_faer(m).eigenvalues().expect("eigen converges")
}

pub fn spectral_radius(m: &CMatrix) -> f64 {
    eigenvalues(m).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Distance between the column spans of two orthonormal bases (inf when dimensions differ).
pub fn span_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.ncols() != b.ncols() || a.nrows() != b.nrows() {
        return f64::INFINITY;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    norm2(&(b - a * (a.adjoint() * b)))
}

pub fn random_complex<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    re_part(&random_complex(n, n, rng))
}

/// Haar-distributed unitary matrix (QR of a Gaussian matrix with phase correction).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let qr = random_complex(n, n, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        let col = q.column(j) * phase;
        q.set_column(j, &col);
    }
    q
}

/// Random Hermitian positive semidefinite matrix of the given rank.
pub fn random_psd<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> CMatrix {
    let g = random_complex(n, rank, rng);
    &g * g.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lstsq_solves_consistent_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = random_complex(7, 4, &mut rng);
        let x = random_complex(4, 2, &mut rng);
        assert!((lstsq(&m, &(&m * &x)) - x).norm() < 1e-12);
    }

    #[test]
    fn polar_factor_is_unitary_and_fixes_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = polar_unitary(&random_complex(4, 4, &mut rng));
        assert!((p.adjoint() * &p - eye(4)).norm() < 1e-12);
        let u = random_unitary(4, &mut rng);
        assert!((polar_unitary(&u) - &u).norm() < 1e-12);
    }

    #[test]
    fn orth_and_null_space_are_complementary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_complex(5, 2, &mut rng);
        let m = hstack(&[&g, &(&g * random_complex(2, 1, &mut rng))]);
        let q = orth(&m, DEFAULT_TOL);
        assert_eq!(q.ncols(), 2);
        let n = null_space(&m, DEFAULT_TOL);
        assert_eq!(n.ncols(), 1);
        assert!((&m * &n).norm() < 1e-12);
        assert!((q.adjoint() * &q - eye(2)).norm() < 1e-12);
    }

    #[test]
    fn empty_inputs_do_not_panic() {
        assert_eq!(orth(&zeros(3, 0), DEFAULT_TOL).ncols(), 0);
        assert_eq!(null_space(&zeros(0, 3), DEFAULT_TOL).ncols(), 3);
        assert_eq!(complement(&zeros(2, 0)).ncols(), 2);
        assert_eq!(rank(&zeros(0, 0), DEFAULT_TOL), 0);
    }

    #[test]
    fn parts_of_a_matrix() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 2.0), c(0.0, 1.0), c(3.0, 0.0), c(0.0, -1.0)]);
        let back = re_part(&m) + im_part(&m) * I;
        assert!((back - &m).norm() < 1e-15);
        assert!(hermitian_residual(&im_part(&m)) < 1e-15);
    }

    #[test]
    fn singular_inverse_is_reported() {
        let m = from_real(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(try_inverse(&m, "m", DEFAULT_TOL), Err(Error::Singular { .. })));
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = random_unitary(6, &mut rng);
        assert!((u.adjoint() * &u - eye(6)).norm() < 1e-12);
    }
}
