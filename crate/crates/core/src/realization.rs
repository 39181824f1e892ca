//! Passive quasi-selfadjoint systems (Ã, K, F) and their unitary similarity.
//!
//! The transfer function is Θ(z) = F + K*(Ã − z)⁻¹K. Two simple systems with
//! the same transfer function are unitarily similar; [`decide_unitary_similarity`]
//! compares Markov parameters and then builds the unitary from matched Krylov bases.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_tol, Error, Result};
use crate::herglotz::MatrixFunction;
use crate::linalg::{self, c, CMatrix};

/// Constant used in the residual contract of [`decide_unitary_similarity`]:
/// ‖UK₁ − K₂‖ and ‖UÃ₁ − Ã₂U‖ are at most `SIMILARITY_SLACK · tol` times the system scale.
pub const SIMILARITY_SLACK: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PqsSystem {
    a: CMatrix,
    k: CMatrix,
    f: CMatrix,
    tol: f64,
}

impl PqsSystem {
    pub fn new(a: CMatrix, k: CMatrix, f: CMatrix, tol: f64) -> Result<Self> {
        check_tol(tol)?;
        let n = a.nrows();
        if a.ncols() != n || k.nrows() != n {
            return Err(Error::Dimension("state matrix and input map disagree".into()));
        }
        let kk = k.ncols();
        if f.nrows() != kk || f.ncols() != kk {
            return Err(Error::Dimension(format!("F must be {kk}x{kk}")));
        }
        if kk == 0 || linalg::rank(&k, tol) < kk {
            return Err(Error::Precondition("K is not injective".into()));
        }
        let skew = &a - a.adjoint();
        let q = linalg::orth(&k, tol);
        let outside = (&skew - &q * (q.adjoint() * &skew)).norm();
        if outside > tol.sqrt() * skew.norm().max(1.0) {
            return Err(Error::Precondition(format!("ran(A - A*) is not inside ran K (residual {outside:e})")));
        }
        Ok(PqsSystem { a, k, f, tol })
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.k.ncols()
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn k(&self) -> &CMatrix {
        &self.k
    }

    pub fn f(&self) -> &CMatrix {
        &self.f
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn transfer_function(&self, z: Complex64) -> Result<CMatrix> {
        let n = self.state_dim();
        let r = linalg::inverse_at(&(&self.a - linalg::scalar(n, z)), "A - z", z, self.tol)?;
        Ok(&self.f + self.k.adjoint() * r * &self.k)
    }

    /// [K, ÃK, …, Ãⁿ⁻¹K].
    pub fn krylov_matrix(&self) -> CMatrix {
        let mut blocks = vec![self.k.clone()];
        for _ in 1..self.state_dim() {
            let next = &self.a * blocks.last().unwrap();
            blocks.push(next);
        }
        let refs: Vec<&CMatrix> = blocks.iter().collect();
        linalg::hstack(&refs)
    }

    pub fn is_simple(&self) -> bool {
        linalg::rank(&self.krylov_matrix(), self.tol) == self.state_dim()
    }

    /// [F, K*K, K*ÃK, …, K*Ãᵐ⁻¹K]; the z⁻ʲ⁻¹ coefficient of Θ is −K*ÃʲK.
    pub fn markov_parameters(&self, m: usize) -> Vec<CMatrix> {
        let mut out = vec![self.f.clone()];
        let mut power = self.k.clone();
        for _ in 0..m {
            out.push(self.k.adjoint() * &power);
            power = &self.a * power;
        }
        out
    }

    /// (VÃV*, VK, F).
    pub fn conjugate(&self, v: &CMatrix) -> Result<PqsSystem> {
        PqsSystem::new(v * &self.a * v.adjoint(), v * &self.k, self.f.clone(), self.tol)
    }

    fn scale(&self) -> f64 {
        self.a.norm().max(self.k.norm()).max(1.0)
    }
}

impl MatrixFunction for PqsSystem {
    fn dim(&self) -> usize {
        self.input_dim()
    }

    fn eval(&self, z: Complex64) -> Result<CMatrix> {
        self.transfer_function(z)
    }
}

/// Why two systems were decided not to be unitarily similar.
#[derive(Debug, Clone, PartialEq)]
pub enum Mismatch {
    StateDim { n1: usize, n2: usize },
    Markov { index: usize, residual: f64 },
    Construction { residual: f64 },
}

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mismatch::StateDim { n1, n2 } => write!(f, "state dimensions differ ({n1} vs {n2})"),
            Mismatch::Markov { index: 0, residual } => write!(f, "feedthrough terms differ (residual {residual:e})"),
            Mismatch::Markov { index, residual } => {
                write!(f, "Markov parameter {index} differs (residual {residual:e})")
            }
            Mismatch::Construction { residual } => {
                write!(f, "matched Krylov bases do not intertwine (residual {residual:e})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Similarity {
    Equivalent(CMatrix),
    NotEquivalent(Mismatch),
}

impl Similarity {
    pub fn unitary(&self) -> Option<&CMatrix> {
        match self {
            Similarity::Equivalent(u) => Some(u),
            Similarity::NotEquivalent(_) => None,
        }
    }

    pub fn is_equivalent(&self) -> bool {
        matches!(self, Similarity::Equivalent(_))
    }
}

/// Residuals of UU* = I, UK₁ = K₂, UÃ₁ = Ã₂U and F₁ = F₂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityResiduals {
    pub unitarity: f64,
    pub input: f64,
    pub state: f64,
    pub feedthrough: f64,
}

impl SimilarityResiduals {
    pub fn max(&self) -> f64 {
        self.unitarity.max(self.input).max(self.state).max(self.feedthrough)
    }
}

pub fn verify_similarity(s1: &PqsSystem, s2: &PqsSystem, u: &CMatrix) -> Result<SimilarityResiduals> {
    let (n1, n2) = (s1.state_dim(), s2.state_dim());
    if u.nrows() != n2 || u.ncols() != n1 || n1 != n2 {
        return Err(Error::Dimension(format!("U must be {n2}x{n1} with equal state dimensions")));
    }
    if s1.input_dim() != s2.input_dim() {
        return Err(Error::Dimension("input dimensions differ".into()));
    }
    Ok(SimilarityResiduals {
        unitarity: (u.adjoint() * u - linalg::eye(n1)).norm(),
        input: (u * s1.k() - s2.k()).norm(),
        state: (u * s1.a() - s2.a() * u).norm(),
        feedthrough: (s1.f() - s2.f()).norm(),
    })
}

/// Orthonormal Krylov bases built with pivots chosen on system 1 and replayed on system 2.
fn matched_bases(s1: &PqsSystem, s2: &PqsSystem, tol: f64) -> Result<(CMatrix, CMatrix)> {
    let n = s1.state_dim();
    let mut v1: Vec<nalgebra::DVector<Complex64>> = Vec::with_capacity(n);
    let mut v2: Vec<nalgebra::DVector<Complex64>> = Vec::with_capacity(n);
    let mut pool: Vec<(nalgebra::DVector<Complex64>, nalgebra::DVector<Complex64>)> =
        (0..s1.input_dim()).map(|j| (s1.k().column(j).into_owned(), s2.k().column(j).into_owned())).collect();
    let threshold = tol * s1.scale();
    while v1.len() < n {
        let mut best: Option<(usize, f64)> = None;
        for (i, (w1, _)) in pool.iter().enumerate() {
            let mut r = w1.clone();
            for q in &v1 {
                r -= q * q.dotc(&r);
            }
            let norm = r.norm() / w1.norm().max(f64::MIN_POSITIVE);
            if best.is_none_or(|(_, b)| norm > b) {
                best = Some((i, norm));
            }
        }
        let Some((i, rel)) = best else { break };
        if rel <= threshold {
            break;
        }
        let (mut w1, mut w2) = pool.swap_remove(i);
        // two passes of Gram-Schmidt, coefficients taken from system 1
        for _ in 0..2 {
            for (q1, q2) in v1.iter().zip(&v2) {
                let h = q1.dotc(&w1);
                w1 -= q1 * h;
                w2 -= q2 * h;
            }
        }
        let rho = w1.norm();
        let (q1, q2) = (w1 / c(rho, 0.0), w2 / c(rho, 0.0));
        pool.push((s1.a() * &q1, s2.a() * &q2));
        v1.push(q1);
        v2.push(q2);
    }
    if v1.len() < n {
        return Err(Error::NotSimple { rank: v1.len(), dim: n });
    }
    Ok((CMatrix::from_columns(&v1), CMatrix::from_columns(&v2)))
}

/// Gauss-Newton steps on UK₁ = K₂, UÃ₁ = Ã₂U, each followed by a projection onto the unitaries.
fn refine(s1: &PqsSystem, s2: &PqsSystem, mut u: CMatrix) -> CMatrix {
    let (n, k) = (s1.state_dim(), s1.input_dim());
    let apply = |x: &CMatrix| -> CMatrix {
        let top = x * s1.k();
        let bottom = x * s1.a() - s2.a() * x;
        CMatrix::from_iterator(n * k + n * n, 1, top.iter().chain(bottom.iter()).copied())
    };
    let mut jac = linalg::zeros(n * k + n * n, n * n);
    for j in 0..n * n {
        let mut e = linalg::zeros(n, n);
        e[j] = c(1.0, 0.0);
        jac.set_column(j, &apply(&e).column(0));
    }
    for _ in 0..2 {
        let target = CMatrix::from_iterator(
            n * k + n * n,
            1,
            s2.k().iter().copied().chain(std::iter::repeat_n(c(0.0, 0.0), n * n)),
        );
        let step = linalg::lstsq(&jac, &(target - apply(&u)));
        u += CMatrix::from_column_slice(n, n, step.as_slice());
        u = linalg::polar_unitary(&u);
    }
    u
}

/// Decides whether two simple systems are unitarily similar (UK₁ = K₂, UÃ₁ = Ã₂U, F₁ = F₂).
///
/// Markov parameters are compared up to index 2·max(n₁, n₂), relative to max(1, ‖·‖).
/// An equivalent verdict carries U with residuals at most [`SIMILARITY_SLACK`]·tol·scale.
pub fn decide_unitary_similarity(s1: &PqsSystem, s2: &PqsSystem, tol: f64) -> Result<Similarity> {
    check_tol(tol)?;
    if s1.input_dim() != s2.input_dim() {
        return Err(Error::Dimension(format!(
            "input dimensions differ ({} vs {})",
            s1.input_dim(),
            s2.input_dim()
        )));
    }
    for s in [s1, s2] {
        if !s.is_simple() {
            let rank = linalg::rank(&s.krylov_matrix(), s.tol);
            return Err(Error::NotSimple { rank, dim: s.state_dim() });
        }
    }
    let (n1, n2) = (s1.state_dim(), s2.state_dim());
    if n1 != n2 {
        return Ok(Similarity::NotEquivalent(Mismatch::StateDim { n1, n2 }));
    }
    let depth = 2 * n1.max(n2);
    let m1 = s1.markov_parameters(depth);
    let m2 = s2.markov_parameters(depth);
    for (index, (a, b)) in m1.iter().zip(&m2).enumerate() {
        let residual = (a - b).norm() / a.norm().max(b.norm()).max(1.0);
        if residual > tol {
            return Ok(Similarity::NotEquivalent(Mismatch::Markov { index, residual }));
        }
    }
    let (v1, v2) = matched_bases(s1, s2, tol)?;
    let u = refine(s1, s2, &v2 * v1.adjoint());
    let r = verify_similarity(s1, s2, &u)?;
    let residual = r.unitarity.max(r.input / s1.scale()).max(r.state / s1.scale());
    if residual > SIMILARITY_SLACK * tol {
        return Ok(Similarity::NotEquivalent(Mismatch::Construction { residual }));
    }
    Ok(Similarity::Equivalent(u))
}

fn scaled_to_radius(a: CMatrix, radius: f64) -> CMatrix {
    let rho = linalg::spectral_radius(&a);
    if rho > 0.0 {
        a * c(radius / rho, 0.0)
    } else {
        a
    }
}

fn generate(n: usize, k: usize, spectral_radius: f64, seed: u64, hermitian: bool, tol: f64) -> Result<PqsSystem> {
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    if !(spectral_radius > 0.0) {
        return Err(Error::InvalidArgument("spectral radius must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let k_map = linalg::random_complex(n, k, &mut rng);
        let h = linalg::random_hermitian(n, &mut rng);
        let inner = if hermitian {
            linalg::random_hermitian(k, &mut rng)
        } else {
            linalg::random_complex(k, k, &mut rng)
        };
        let a = scaled_to_radius(h + &k_map * inner * k_map.adjoint(), spectral_radius);
        let f = if hermitian {
            linalg::random_hermitian(k, &mut rng)
        } else {
            linalg::random_complex(k, k, &mut rng)
        };
        let s = PqsSystem::new(a, k_map, f, tol)?;
        if s.is_simple() {
            return Ok(s);
        }
    }
}

/// Random simple system with ran(Ã − Ã*) ⊆ ran K, deterministic in `seed`.
pub fn random_system(n: usize, k: usize, spectral_radius: f64, seed: u64, tol: f64) -> Result<PqsSystem> {
    generate(n, k, spectral_radius, seed, false, tol)
}

/// As [`random_system`] with Ã and F Hermitian.
pub fn random_hermitian_system(n: usize, k: usize, spectral_radius: f64, seed: u64, tol: f64) -> Result<PqsSystem> {
    generate(n, k, spectral_radius, seed, true, tol)
}
