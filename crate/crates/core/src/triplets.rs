//! Boundary triplets for bounded symmetric matrices with nondense domain.
//!
//! Coordinates are adapted to ℂⁿ = 𝒟 ⊕ 𝔑: the first `d` coordinates span the
//! domain 𝒟 and the last `k = n − d` span 𝔑 = mul A*. Elements of A* are pairs
//! (f, f′) and boundary maps are k × 2n matrices acting on the stacked vector.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_tol, Error, Result};
use crate::herglotz::{HerglotzMatrixFunction, MatrixFunction};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::measures::{Atom, MatrixMeasure};
use crate::relations::{stack_pair, LinearRelation, PointClass, Subspace};

/// A = [A₀₀; A₁₀] : 𝒟 → ℂⁿ with A₀₀ Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct NondenseSymmetric {
    a00: CMatrix,
    a10: CMatrix,
    tol: f64,
}

impl NondenseSymmetric {
    pub fn new(a00: CMatrix, a10: CMatrix, tol: f64) -> Result<Self> {
        check_tol(tol)?;
        linalg::check_hermitian(&a00, tol)?;
        if a10.ncols() != a00.nrows() {
            return Err(Error::Dimension("A10 must have d columns".into()));
        }
        if a10.nrows() == 0 {
            return Err(Error::Precondition("deficiency must be positive (the domain is not dense)".into()));
        }
        Ok(NondenseSymmetric { a00: linalg::re_part(&a00), a10, tol })
    }

    /// Rewrites a symmetric operator given by its graph in adapted coordinates.
    /// Returns the model and the unitary `Q` with original = Q · adapted.
    pub fn from_operator_graph(t: &LinearRelation, tol: f64) -> Result<(Self, CMatrix)> {
        let n = t.dim_in();
        if t.dim_out() != n {
            return Err(Error::Dimension("expected a relation in ℂⁿ ⊕ ℂⁿ".into()));
        }
        let parts = t.parts();
        if parts.mul.dim() != 0 {
            return Err(Error::Precondition("relation is multivalued".into()));
        }
        if !t.is_symmetric(tol.sqrt()) {
            return Err(Error::Precondition("relation is not symmetric".into()));
        }
        let basis = t.graph().basis();
        let x = linalg::rows(basis, 0, n);
        let y = linalg::rows(basis, n, n);
        let qd = parts.dom.basis().clone();
        let qn = linalg::complement(&qd);
        let gram = linalg::try_inverse(&(x.adjoint() * &x), "graph Gram matrix", tol)?;
        let op_on_dom = &y * gram * x.adjoint() * &qd;
        let a00 = linalg::re_part(&(qd.adjoint() * &op_on_dom));
        let a10 = qn.adjoint() * &op_on_dom;
        let q = linalg::hstack(&[&qd, &qn]);
        Ok((Self::new(a00, a10, tol)?, q))
    }

    pub fn n(&self) -> usize {
        self.a00.nrows() + self.a10.nrows()
    }

    pub fn d(&self) -> usize {
        self.a00.nrows()
    }

    pub fn k(&self) -> usize {
        self.a10.nrows()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn a00(&self) -> &CMatrix {
        &self.a00
    }

    pub fn a10(&self) -> &CMatrix {
        &self.a10
    }

    /// Embedding of 𝒟 (n × d).
    pub fn e_d(&self) -> CMatrix {
        linalg::vstack(&[&linalg::eye(self.d()), &linalg::zeros(self.k(), self.d())])
    }

    /// Embedding of 𝔑 (n × k).
    pub fn e_n(&self) -> CMatrix {
        linalg::vstack(&[&linalg::zeros(self.d(), self.k()), &linalg::eye(self.k())])
    }

    /// [A₀₀; A₁₀] as an n × d matrix.
    pub fn column(&self) -> CMatrix {
        linalg::vstack(&[&self.a00, &self.a10])
    }

    pub fn domain(&self) -> Subspace {
        Subspace::span(&self.e_d(), self.tol).expect("valid tolerance")
    }

    pub fn defect_space(&self) -> Subspace {
        Subspace::span(&self.e_n(), self.tol).expect("valid tolerance")
    }

    pub fn graph(&self) -> LinearRelation {
        if self.d() == 0 {
            return LinearRelation::zero(self.n(), self.tol).expect("valid tolerance");
        }
        LinearRelation::from_graph(&linalg::vstack(&[&self.e_d(), &self.column()]), self.tol).expect("valid tolerance")
    }

    pub fn adjoint(&self) -> LinearRelation {
        self.graph().adjoint()
    }

    /// [[A₀₀, A₁₀*], [A₁₀, B]], the bounded extension inside A* with 𝔑-block B.
    pub fn extension(&self, b: &CMatrix) -> CMatrix {
        linalg::block2(&self.a00, &self.a10.adjoint(), &self.a10, b)
    }

    /// Basis (2n × (n + k)) of A* = Ã ∔ {0} ⊕ 𝔑 built from Ã₀ = extension(0).
    fn adjoint_spanning(&self) -> CMatrix {
        let n = self.n();
        let a0 = self.extension(&linalg::zeros(self.k(), self.k()));
        linalg::block2(&linalg::eye(n), &linalg::zeros(n, self.k()), &a0, &self.e_n())
    }

    /// ‖P_𝒟 f′ − A₀₀ f_𝒟 − A₁₀* f_𝔑‖, zero exactly on A*.
    pub fn adjoint_residual(&self, f: &CVector, fp: &CVector) -> f64 {
        let d = self.d();
        let fd = f.rows(0, d);
        let fne = f.rows(d, self.k());
        (fp.rows(0, d) - &self.a00 * fd - self.a10.adjoint() * fne).norm()
    }

    fn check_pair(&self, f: &CVector, fp: &CVector) -> Result<()> {
        if f.len() != self.n() || fp.len() != self.n() {
            return Err(Error::Dimension("pair has the wrong length".into()));
        }
        let r = self.adjoint_residual(f, fp);
        if r > self.tol * (f.norm() + fp.norm()).max(1.0) {
            return Err(Error::NotInAdjoint(r));
        }
        Ok(())
    }

    /// Checks that Ã agrees with A on 𝒟 and lies in A*.
    pub fn check_extension(&self, a: &CMatrix) -> Result<()> {
        let n = self.n();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::Dimension(format!("extension must be {n}x{n}")));
        }
        let scale = a.norm().max(1.0) * self.tol;
        let left = (linalg::cols(a, 0, self.d()) - self.column()).norm();
        let corner = (a.view((0, self.d()), (self.d(), self.k())) - self.a10.adjoint()).norm();
        if left > scale || corner > scale {
            return Err(Error::Precondition(format!(
                "matrix is not an extension of A inside A* (residuals {left:e}, {corner:e})"
            )));
        }
        Ok(())
    }
}

/// A* = graph(Ã) ∔ ({0} ⊕ 𝔑) for a bounded extension Ã of A inside A*.
pub fn adjoint_decomposition(s: &NondenseSymmetric, a: &CMatrix) -> Result<LinearRelation> {
    s.check_extension(a)?;
    let n = s.n();
    let basis = linalg::block2(&linalg::eye(n), &linalg::zeros(n, s.k()), a, &s.e_n());
    LinearRelation::from_graph(&basis, s.tol)
}

/// Images of an element of A* under the four boundary maps.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryValues {
    pub gamma0: CVector,
    pub gamma1: CVector,
    pub gamma0_t: CVector,
    pub gamma1_t: CVector,
}

/// Boundary triplet for the dual pair {A, A}: maps Γ₀, Γ₁, Γ₀⊤, Γ₁⊤ on A*
/// satisfying ⟨f′, g⟩ − ⟨f, g′⟩ = ⟨Γ₁f̂, Γ₀⊤ĝ⟩ − ⟨Γ₀f̂, Γ₁⊤ĝ⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPairTriplet {
    base: NondenseSymmetric,
    g0: CMatrix,
    g1: CMatrix,
    g0t: CMatrix,
    g1t: CMatrix,
    star: CMatrix,
}

impl DualPairTriplet {
    pub fn new(base: NondenseSymmetric, g0: CMatrix, g1: CMatrix, g0t: CMatrix, g1t: CMatrix) -> Result<Self> {
        let (k, n) = (base.k(), base.n());
        for m in [&g0, &g1, &g0t, &g1t] {
            if m.nrows() != k || m.ncols() != 2 * n {
                return Err(Error::Dimension(format!("boundary maps must be {k}x{}", 2 * n)));
            }
        }
        let star = linalg::orth(&base.adjoint_spanning(), base.tol);
        Ok(DualPairTriplet { base, g0, g1, g0t, g1t, star })
    }

    pub fn base(&self) -> &NondenseSymmetric {
        &self.base
    }

    pub fn maps(&self) -> [&CMatrix; 4] {
        [&self.g0, &self.g1, &self.g0t, &self.g1t]
    }

    /// Orthonormal basis of A* (2n × (n + k)).
    pub fn adjoint_basis(&self) -> &CMatrix {
        &self.star
    }

    pub fn is_ordinary(&self) -> bool {
        let tol = self.base.tol * self.g0.norm().max(self.g1.norm()).max(1.0);
        ((&self.g0 - &self.g0t) * &self.star).norm() <= tol && ((&self.g1 - &self.g1t) * &self.star).norm() <= tol
    }

    pub fn apply(&self, f: &CVector, fp: &CVector) -> Result<BoundaryValues> {
        self.base.check_pair(f, fp)?;
        let v = stack_pair(f, fp);
        Ok(BoundaryValues { gamma0: &self.g0 * &v, gamma1: &self.g1 * &v, gamma0_t: &self.g0t * &v, gamma1_t: &self.g1t * &v })
    }

    /// Green identity defect on the basis of A*, relative to max(1, ‖Γ‖‖Γ⊤‖).
    pub fn green_residual(&self) -> f64 {
        let n = self.base.n();
        let j = linalg::block2(&linalg::zeros(n, n), &linalg::eye(n), &(-linalg::eye(n)), &linalg::zeros(n, n));
        let form = j - self.g0t.adjoint() * &self.g1 + self.g1t.adjoint() * &self.g0;
        let scale = (linalg::norm2(&self.g0) + linalg::norm2(&self.g1))
            * (linalg::norm2(&self.g0t) + linalg::norm2(&self.g1t));
        (self.star.adjoint() * form * &self.star).norm() / scale.max(1.0)
    }

    fn kernel_in_star(&self, rows: &CMatrix) -> Subspace {
        let tol = self.base.tol;
        let coeffs = linalg::null_space(&(rows * &self.star), tol);
        Subspace::span(&(&self.star * coeffs), tol).expect("valid tolerance")
    }

    /// ker Γ ∩ ker Γ⊤.
    pub fn joint_kernel(&self) -> Subspace {
        self.kernel_in_star(&linalg::vstack(&[&self.g0, &self.g1, &self.g0t, &self.g1t]))
    }

    /// Distance between the joint kernel and the graph of A.
    pub fn joint_kernel_residual(&self) -> f64 {
        self.joint_kernel().distance(self.base.graph().graph())
    }

    /// Whether (Γ₀, Γ₁) and (Γ₀⊤, Γ₁⊤) map A* onto ℂᵏ ⊕ ℂᵏ.
    pub fn is_surjective(&self) -> bool {
        let tol = self.base.tol;
        let k = self.base.k();
        linalg::rank(&(linalg::vstack(&[&self.g0, &self.g1]) * &self.star), tol) == 2 * k
            && linalg::rank(&(linalg::vstack(&[&self.g0t, &self.g1t]) * &self.star), tol) == 2 * k
    }

    /// ker Γ₀.
    pub fn reference_extension(&self) -> LinearRelation {
        let n = self.base.n();
        LinearRelation::from_subspace(n, n, self.kernel_in_star(&self.g0), self.base.tol)
    }

    /// ker(Γ₁ − ΘΓ₀).
    pub fn extension(&self, theta: &CMatrix) -> Result<LinearRelation> {
        let k = self.base.k();
        if theta.nrows() != k || theta.ncols() != k {
            return Err(Error::Dimension(format!("boundary parameter must be {k}x{k}")));
        }
        let n = self.base.n();
        Ok(LinearRelation::from_subspace(n, n, self.kernel_in_star(&(&self.g1 - theta * &self.g0)), self.base.tol))
    }

    /// Basis (2n × k) of {(f, zf) : f ∈ ker(A* − z)}.
    pub fn defect_basis(&self, z: Complex64) -> CMatrix {
        let b = &self.base;
        let eq = linalg::hstack(&[&(&b.a00 - linalg::scalar(b.d(), z)), &b.a10.adjoint()]);
        let f = linalg::null_space(&eq, b.tol);
        linalg::vstack(&[&f, &(&f * z)])
    }

    /// M(z) from Γ₁f̂_z = M(z)Γ₀f̂_z on defect elements.
    pub fn weyl_from_defect(&self, z: Complex64) -> Result<CMatrix> {
        let fz = self.defect_basis(z);
        let inv = linalg::inverse_at(&(&self.g0 * &fz), "Gamma0 on the defect space", z, self.base.tol)?;
        Ok(&self.g1 * fz * inv)
    }

    /// Largest difference of all four maps on A*, relative to max(1, ‖Γ‖).
    pub fn maps_residual(&self, other: &DualPairTriplet) -> f64 {
        self.maps()
            .iter()
            .zip(other.maps())
            .map(|(a, b)| ((*a - b) * &self.star).norm() / a.norm().max(1.0))
            .fold(0.0, f64::max)
    }

    /// Recovers (A₀, γ, 𝓕) when Γ₀ and Γ₀⊤ agree on {0} ⊕ 𝔑 and ker Γ₀ is a bounded operator.
    pub fn to_bt_inf(&self) -> Result<BTInfTriplet> {
        let b = &self.base;
        let tol = b.tol;
        let a0 = self
            .reference_extension()
            .as_operator()
            .ok_or_else(|| Error::Precondition("ker Gamma0 is not an everywhere defined operator".into()))?;
        b.check_extension(&a0)?;
        let mul = linalg::vstack(&[&linalg::zeros(b.n(), b.k()), &b.e_n()]);
        let g0n = &self.g0 * &mul;
        let g0tn = &self.g0t * &mul;
        if (&g0n - &g0tn).norm() > tol.sqrt() * g0n.norm().max(1.0) {
            return Err(Error::Precondition("Gamma0 and its transpose differ on the multivalued part".into()));
        }
        let g = linalg::try_inverse(&g0n, "Gamma0 on the multivalued part", tol)?;
        let f = &self.g1 * &mul * &g;
        let b0 = a0.view((b.d(), b.d()), (b.k(), b.k())).into_owned();
        BTInfTriplet::new(b.clone(), b0, g, f)
    }
}

/// BT_∞ triplet generated by A₀ = [[A₀₀, A₁₀*], [A₁₀, B₀]], γ = E_𝔑G and 𝓕:
/// Γ₀f̂ = G⁻¹(f′ − A₀f)_𝔑, Γ₁f̂ = −G*f_𝔑 + 𝓕G⁻¹(f′ − A₀f)_𝔑,
/// and the transposed maps with A₀*, 𝓕*.
#[derive(Debug, Clone, PartialEq)]
pub struct BTInfTriplet {
    base: NondenseSymmetric,
    b0: CMatrix,
    g: CMatrix,
    g_inv: CMatrix,
    forbidden: CMatrix,
}

impl BTInfTriplet {
    pub fn new(base: NondenseSymmetric, b0: CMatrix, g: CMatrix, forbidden: CMatrix) -> Result<Self> {
        let k = base.k();
        for m in [&b0, &g, &forbidden] {
            if m.nrows() != k || m.ncols() != k {
                return Err(Error::Dimension(format!("expected {k}x{k} blocks")));
            }
        }
        let g_inv = linalg::try_inverse(&g, "gamma", base.tol)?;
        Ok(BTInfTriplet { base, b0, g, g_inv, forbidden })
    }

    pub fn base(&self) -> &NondenseSymmetric {
        &self.base
    }

    pub fn a0(&self) -> CMatrix {
        self.base.extension(&self.b0)
    }

    /// γ as an n × k matrix with range 𝔑.
    pub fn gamma(&self) -> CMatrix {
        self.base.e_n() * &self.g
    }

    /// γ read in 𝔑 coordinates (k × k).
    pub fn gamma_block(&self) -> &CMatrix {
        &self.g
    }

    pub fn forbidden(&self) -> &CMatrix {
        &self.forbidden
    }

    fn map_pair(&self, a0: &CMatrix, f: &CMatrix) -> (CMatrix, CMatrix) {
        let en_t = self.base.e_n().adjoint();
        let n = self.base.n();
        let g0 = &self.g_inv * &en_t * linalg::hstack(&[&(-a0), &linalg::eye(n)]);
        let pn = linalg::hstack(&[&en_t, &linalg::zeros(self.base.k(), n)]);
        let g1 = -(self.g.adjoint() * pn) + f * &g0;
        (g0, g1)
    }

    pub fn triplet(&self) -> DualPairTriplet {
        let a0 = self.a0();
        let (g0, g1) = self.map_pair(&a0, &self.forbidden);
        let (g0t, g1t) = self.map_pair(&a0.adjoint(), &self.forbidden.adjoint());
        DualPairTriplet::new(self.base.clone(), g0, g1, g0t, g1t).expect("shapes are consistent")
    }

    pub fn boundary_maps(&self, f: &CVector, fp: &CVector) -> Result<BoundaryValues> {
        self.base.check_pair(f, fp)?;
        let (d, k) = (self.base.d(), self.base.k());
        let a0 = self.a0();
        let fne = f.rows(d, k).into_owned();
        let r = (fp - &a0 * f).rows(d, k).into_owned();
        let rt = (fp - a0.adjoint() * f).rows(d, k).into_owned();
        let gamma0 = &self.g_inv * r;
        let gamma0_t = &self.g_inv * rt;
        let gamma1 = -(self.g.adjoint() * &fne) + &self.forbidden * &gamma0;
        let gamma1_t = -(self.g.adjoint() * &fne) + self.forbidden.adjoint() * &gamma0_t;
        Ok(BoundaryValues { gamma0, gamma1, gamma0_t, gamma1_t })
    }

    /// M(z) = 𝓕 + γ*(A₀ − z)⁻¹γ.
    pub fn weyl_function(&self, z: Complex64) -> Result<CMatrix> {
        let n = self.base.n();
        let inv = linalg::inverse_at(&(self.a0() - linalg::scalar(n, z)), "A0 - z", z, self.base.tol)?;
        let gm = self.gamma();
        Ok(&self.forbidden + gm.adjoint() * inv * gm)
    }
}

impl MatrixFunction for BTInfTriplet {
    fn dim(&self) -> usize {
        self.base.k()
    }

    fn eval(&self, z: Complex64) -> Result<CMatrix> {
        self.weyl_function(z)
    }
}

/// BT_∞ triplet with A₀ = Ã, γ = `k_map` (n × k with range 𝔑) and 𝓕 = `f`.
pub fn build_bt_inf(base: &NondenseSymmetric, a: &CMatrix, k_map: &CMatrix, f: &CMatrix) -> Result<BTInfTriplet> {
    base.check_extension(a)?;
    let (n, k) = (base.n(), base.k());
    if k_map.nrows() != n || k_map.ncols() != k {
        return Err(Error::Dimension(format!("K must be {n}x{k}")));
    }
    let off = linalg::rows(k_map, 0, base.d()).norm();
    if off > base.tol * k_map.norm().max(1.0) {
        return Err(Error::Precondition("K does not map into the multivalued part".into()));
    }
    let g = linalg::rows(k_map, base.d(), k);
    let b0 = a.view((base.d(), base.d()), (k, k)).into_owned();
    BTInfTriplet::new(base.clone(), b0, g, f.clone())
}

/// A_B = ker(Γ₁ − BΓ₀).
pub fn extension_from_boundary(t: &DualPairTriplet, b: &CMatrix) -> Result<LinearRelation> {
    t.extension(b)
}

/// Ordinary triplet Γ₀ = K*G*f_𝔑, Γ₁ = K⁻¹(G⁻¹(f′ − Ã₀f)_𝔑 − R G*f_𝔑)
/// relative to Ã₀ = extension(0); K = I and R = 0 give the plain model.
#[derive(Debug, Clone, PartialEq)]
pub struct OrdinaryTripletModel {
    base: NondenseSymmetric,
    g: CMatrix,
    g_inv: CMatrix,
    scale: CMatrix,
    scale_inv: CMatrix,
    shift: CMatrix,
}

impl OrdinaryTripletModel {
    pub fn new(base: NondenseSymmetric, g: CMatrix) -> Result<Self> {
        let k = base.k();
        if g.nrows() != k || g.ncols() != k {
            return Err(Error::Dimension(format!("gamma must be {k}x{k}")));
        }
        let g_inv = linalg::try_inverse(&g, "gamma", base.tol)?;
        Ok(OrdinaryTripletModel {
            base,
            g,
            g_inv,
            scale: linalg::eye(k),
            scale_inv: linalg::eye(k),
            shift: linalg::zeros(k, k),
        })
    }

    pub fn base(&self) -> &NondenseSymmetric {
        &self.base
    }

    pub fn gamma_block(&self) -> &CMatrix {
        &self.g
    }

    pub fn scale(&self) -> &CMatrix {
        &self.scale
    }

    pub fn shift(&self) -> &CMatrix {
        &self.shift
    }

    pub fn a0_tilde(&self) -> CMatrix {
        self.base.extension(&linalg::zeros(self.base.k(), self.base.k()))
    }

    pub fn gamma0(&self) -> CMatrix {
        let n = self.base.n();
        let g0 = &self.g.adjoint() * self.base.e_n().adjoint();
        self.scale.adjoint() * linalg::hstack(&[&g0, &linalg::zeros(self.base.k(), n)])
    }

    pub fn gamma1(&self) -> CMatrix {
        let n = self.base.n();
        let en_t = self.base.e_n().adjoint();
        let g1 = &self.g_inv * en_t * linalg::hstack(&[&(-self.a0_tilde()), &linalg::eye(n)]);
        let g0 = linalg::hstack(&[&(self.g.adjoint() * self.base.e_n().adjoint()), &linalg::zeros(self.base.k(), n)]);
        &self.scale_inv * (g1 - &self.shift * g0)
    }

    pub fn triplet(&self) -> DualPairTriplet {
        let (g0, g1) = (self.gamma0(), self.gamma1());
        DualPairTriplet::new(self.base.clone(), g0.clone(), g1.clone(), g0, g1).expect("shapes are consistent")
    }

    /// K⁻¹(G⁻¹(z + A₁₀(A₀₀ − z)⁻¹A₁₀*)G⁻¹* − R)K⁻¹*.
    pub fn weyl(&self, z: Complex64) -> Result<CMatrix> {
        let b = &self.base;
        let inner = if b.d() == 0 {
            linalg::scalar(b.k(), z)
        } else {
            let r = linalg::inverse_at(&(&b.a00 - linalg::scalar(b.d(), z)), "A00 - z", z, b.tol)?;
            linalg::scalar(b.k(), z) + &b.a10 * r * b.a10.adjoint()
        };
        let m0 = &self.g_inv * inner * self.g_inv.adjoint();
        Ok(&self.scale_inv * (m0 - &self.shift) * self.scale_inv.adjoint())
    }

    /// The Weyl function as (C, D, Σ): D = K⁻¹G⁻¹G⁻¹*K⁻¹*, atoms at σ(A₀₀).
    pub fn weyl_herglotz(&self) -> Result<HerglotzMatrixFunction> {
        let b = &self.base;
        let k = b.k();
        let outer = &self.scale_inv * &self.g_inv;
        let cong = |m: &CMatrix| &outer * m * outer.adjoint();
        let mut atoms = Vec::new();
        let mut c0 = -(&self.scale_inv * &self.shift * self.scale_inv.adjoint());
        if b.d() > 0 {
            let e = crate::measures::spectral_measure(&b.a00, b.tol)?;
            for a in e.atoms() {
                let w = linalg::re_part(&cong(&(&b.a10 * &a.weight * b.a10.adjoint())));
                if w.norm() > b.tol * b.a10.norm().powi(2).max(1.0) {
                    let t = a.point;
                    c0 += &w * c(t / (1.0 + t * t), 0.0);
                    atoms.push(Atom { point: t, weight: w });
                }
            }
        }
        let measure = MatrixMeasure::atomic(k, atoms, b.tol.sqrt())?;
        HerglotzMatrixFunction::new(
            linalg::re_part(&c0),
            linalg::re_part(&cong(&linalg::eye(k))),
            measure,
            linalg::zeros(k, k),
            b.tol.sqrt(),
        )
    }

    /// A_Θ = ker(Γ₁ − ΘΓ₀) as a matrix: extension(G(R + KΘK*)G*).
    pub fn extension_matrix(&self, theta: &CMatrix) -> CMatrix {
        let inner = &self.shift + &self.scale * theta * self.scale.adjoint();
        self.base.extension(&(&self.g * inner * self.g.adjoint()))
    }

    /// Input map E_𝔑GK: with Ã = extension_matrix(Θ), K_s*(Ã − z)⁻¹K_s = (Θ − M(z))⁻¹.
    pub fn input_map(&self) -> CMatrix {
        self.base.e_n() * &self.g * &self.scale
    }

    /// Γ̂₀ = K*Γ₀, Γ̂₁ = K⁻¹(Γ₁ − (Re B)Γ₀).
    pub fn hat_transform(&self, k: &CMatrix, b: &CMatrix) -> Result<OrdinaryTripletModel> {
        let kk = self.base.k();
        if k.nrows() != kk || k.ncols() != kk || b.nrows() != kk || b.ncols() != kk {
            return Err(Error::Dimension(format!("K and B must be {kk}x{kk}")));
        }
        let k_inv = linalg::try_inverse(k, "K", self.base.tol)?;
        Ok(OrdinaryTripletModel {
            scale: &self.scale * k,
            scale_inv: k_inv * &self.scale_inv,
            shift: linalg::re_part(&(&self.shift + &self.scale * linalg::re_part(b) * self.scale.adjoint())),
            ..self.clone()
        })
    }

    /// Γ̃₀ = K⁻¹(BΓ₀ − Γ₁), Γ̃₁ = K*Γ₀, Γ̃₀⊤ = K⁻¹(B*Γ₀ − Γ₁), Γ̃₁⊤ = K*Γ₀.
    pub fn dual_pair_triplet(&self, k: &CMatrix, b: &CMatrix) -> Result<DualPairTriplet> {
        let k_inv = linalg::try_inverse(k, "K", self.base.tol)?;
        let (g0, g1) = (self.gamma0(), self.gamma1());
        let t1 = k.adjoint() * &g0;
        DualPairTriplet::new(
            self.base.clone(),
            &k_inv * (b * &g0 - &g1),
            t1.clone(),
            &k_inv * (b.adjoint() * &g0 - &g1),
            t1,
        )
    }
}

/// Unitary copy of a model: blocks conjugated by diag(V_𝒟, V_𝔑) and the parameter
/// space rotated by W, so that M′ = W*MW.
pub fn conjugate_model(
    model: &OrdinaryTripletModel,
    v_d: &CMatrix,
    v_n: &CMatrix,
    w: &CMatrix,
) -> Result<OrdinaryTripletModel> {
    let b = model.base();
    let tol = b.tol;
    for (m, n, what) in [(v_d, b.d(), "V_D"), (v_n, b.k(), "V_N"), (w, b.k(), "W")] {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Dimension(format!("{what} must be {n}x{n}")));
        }
        if (m.adjoint() * m - linalg::eye(n)).norm() > tol.sqrt() {
            return Err(Error::Precondition(format!("{what} is not unitary")));
        }
    }
    let base = NondenseSymmetric::new(v_d * &b.a00 * v_d.adjoint(), v_n * &b.a10 * v_d.adjoint(), tol)?;
    let mut out = OrdinaryTripletModel::new(base, v_n * &model.g * w)?;
    out.scale = w.adjoint() * &model.scale * w;
    out.scale_inv = w.adjoint() * &model.scale_inv * w;
    out.shift = w.adjoint() * &model.shift * w;
    Ok(out)
}

impl OrdinaryTripletModel {
    /// p(λ) = det(R + KΘK* − M₀(λ))·det(A₀₀ − λ), a polynomial of degree n whose
    /// zeros are those of det(Θ − M(λ)) together with any cancelled poles.
    fn weyl_polynomial(&self, theta: &CMatrix, l: Complex64) -> Result<Complex64> {
        let b = &self.base;
        let inner = &self.shift + &self.scale * theta * self.scale.adjoint();
        let mut m = &self.g * inner * self.g.adjoint() - linalg::scalar(b.k(), l);
        let mut det_d = c(1.0, 0.0);
        if b.d() > 0 {
            let shifted = &b.a00 - linalg::scalar(b.d(), l);
            det_d = shifted.determinant();
            let r = linalg::inverse_at(&shifted, "A00 - z", l, b.tol)?;
            m -= &b.a10 * r * b.a10.adjoint();
        }
        Ok(m.determinant() * det_d)
    }

    /// Zeros of λ ↦ det(Θ − M(λ)) (with multiplicity), from the polynomial
    /// det(Θ − M(λ))·det(A₀₀ − λ) sampled on a circle enclosing all of them.
    pub fn weyl_zeros(&self, theta: &CMatrix) -> Result<Vec<Complex64>> {
        let b = &self.base;
        let k = b.k();
        if theta.nrows() != k || theta.ncols() != k {
            return Err(Error::Dimension(format!("boundary parameter must be {k}x{k}")));
        }
        let n = b.n();
        let inner = &self.g * (&self.shift + &self.scale * theta * self.scale.adjoint()) * self.g.adjoint();
        let radius = 1.0 + linalg::norm2(&b.a00) + 2.0 * linalg::norm2(&b.a10) + linalg::norm2(&inner);
        let samples = 2 * (n + 1);
        let offset = 0.5 / samples as f64;
        let mut values = Vec::with_capacity(samples);
        for m in 0..samples {
            let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (m as f64 + offset) / samples as f64);
            values.push((w, self.weyl_polynomial(theta, w * radius)?));
        }
        // coefficients of q(u) = p(radius·u)
        let coeffs: Vec<Complex64> = (0..=n)
            .map(|j| values.iter().map(|(w, v)| v * w.powi(-(j as i32))).sum::<Complex64>() / samples as f64)
            .collect();
        let lead = coeffs[n];
        if lead.norm() == 0.0 {
            return Err(Error::Singular { what: "leading coefficient", sigma: 0.0 });
        }
        let mut companion = linalg::zeros(n, n);
        for i in 1..n {
            companion[(i, i - 1)] = c(1.0, 0.0);
        }
        for i in 0..n {
            companion[(i, n - 1)] = -coeffs[i] / lead;
        }
        let poly = |u: Complex64| coeffs.iter().rev().fold(c(0.0, 0.0), |acc, a| acc * u + a);
        let dpoly = |u: Complex64| {
            coeffs.iter().enumerate().skip(1).rev().fold(c(0.0, 0.0), |acc, (j, a)| acc * u + a * j as f64)
        };
        Ok(linalg::eigenvalues(&companion)
            .into_iter()
            .map(|mut u| {
                for _ in 0..3 {
                    let d = dpoly(u);
                    if d.norm() == 0.0 {
                        break;
                    }
                    u -= poly(u) / d;
                }
                // residuals from the determinant itself, slope from the interpolant
                let mut l = u * radius;
                for _ in 0..3 {
                    let Ok(v) = self.weyl_polynomial(theta, l) else { break };
                    let step = v * radius / dpoly(l / radius);
                    if !step.is_finite() || step.norm() > 1e-6 * (1.0 + l.norm()) {
                        break;
                    }
                    l -= step;
                }
                l
            })
            .collect())
    }
}

impl MatrixFunction for OrdinaryTripletModel {
    fn dim(&self) -> usize {
        self.base.k()
    }

    fn eval(&self, z: Complex64) -> Result<CMatrix> {
        self.weyl(z)
    }
}

/// P_𝔑(A₀ − z)⁻¹|𝔑 computed directly and by the Schur complement
/// (B₀ − z − A₁₀(A₀₀ − z)⁻¹A₀₁)⁻¹; `d` is the dimension of 𝒟.
pub fn schur_compression(a0: &CMatrix, d: usize, z: Complex64, tol: f64) -> Result<(CMatrix, CMatrix)> {
    check_tol(tol)?;
    let n = a0.nrows();
    if a0.ncols() != n || d >= n {
        return Err(Error::Dimension("need a square matrix with a nontrivial lower block".into()));
    }
    let k = n - d;
    let full = linalg::inverse_at(&(a0 - linalg::scalar(n, z)), "A0 - z", z, tol)?;
    let direct = full.view((d, d), (k, k)).into_owned();
    let b = a0.view((d, d), (k, k)).into_owned() - linalg::scalar(k, z);
    let schur = if d == 0 {
        linalg::inverse_at(&b, "Schur complement", z, tol)?
    } else {
        let a00 = a0.view((0, 0), (d, d)).into_owned() - linalg::scalar(d, z);
        let r = linalg::inverse_at(&a00, "A00 - z", z, tol)?;
        let a10 = a0.view((d, 0), (k, d)).into_owned();
        let a01 = a0.view((0, d), (d, k)).into_owned();
        linalg::inverse_at(&(b - a10 * r * a01), "Schur complement", z, tol)?
    };
    Ok((direct, schur))
}

/// Classification of λ for A_Θ, once from the extension and once from Θ − M(λ).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtensionPointReport {
    pub via_extension: PointClass,
    pub via_weyl: PointClass,
}

impl ExtensionPointReport {
    pub fn agree(&self) -> bool {
        self.via_extension == self.via_weyl
    }
}

pub fn classify_extension_point(
    t: &DualPairTriplet,
    theta: &CMatrix,
    lambda: Complex64,
    tol: f64,
) -> Result<ExtensionPointReport> {
    check_tol(tol)?;
    if t.reference_extension().classify_point(lambda, tol)? != PointClass::Resolvent {
        return Err(Error::Precondition(format!("{lambda} is not in the resolvent set of A0")));
    }
    let via_extension = t.extension(theta)?.classify_point(lambda, tol)?;
    let m = t.weyl_from_defect(lambda)?;
    let gap = theta - m;
    let via_weyl = if linalg::rank(&gap, tol) < gap.nrows() {
        PointClass::PointSpectrum
    } else {
        PointClass::Resolvent
    };
    Ok(ExtensionPointReport { via_extension, via_weyl })
}

/// Triplet for S = (A − λ₀)⁻¹ obtained through Y{f, f′} = {f′, f + λ₀f′}.
#[derive(Debug, Clone)]
pub struct MobiusTransform {
    pub lambda0: f64,
    /// Unitary with original coordinates = basis · S-adapted coordinates.
    pub basis: CMatrix,
    /// Γ̇₀ = Γ₀Y, Γ̇₁ = −Γ₁Y in S-adapted coordinates.
    pub triplet: DualPairTriplet,
}

impl MobiusTransform {
    /// The transformed triplet in BT_∞ form.
    pub fn bt_inf(&self) -> Result<BTInfTriplet> {
        self.triplet.to_bt_inf()
    }

    /// S₀ = (A₀ − λ₀)⁻¹ written in S-adapted coordinates, from the original A₀.
    pub fn expected_reference(&self, original: &DualPairTriplet) -> Result<LinearRelation> {
        let a0 = original.reference_extension();
        let n = a0.dim_in();
        let inv = a0.inverse();
        let shifted = {
            let basis = inv.graph().basis();
            let top = linalg::rows(basis, 0, n);
            let bottom = linalg::rows(basis, n, n);
            linalg::vstack(&[&(top - &bottom * c(self.lambda0, 0.0)), &bottom])
        };
        let q = self.basis.adjoint();
        let adapted = linalg::vstack(&[&(&q * linalg::rows(&shifted, 0, n)), &(&q * linalg::rows(&shifted, n, n))]);
        LinearRelation::from_graph(&adapted, a0.tol())
    }
}

pub fn mobius_transform(t: &DualPairTriplet, lambda0: f64, tol: f64) -> Result<MobiusTransform> {
    check_tol(tol)?;
    let b = t.base();
    let n = b.n();
    let w = b.column() - b.e_d() * c(lambda0, 0.0);
    if linalg::rank(&w, tol) < b.d() {
        return Err(Error::Precondition(format!("{lambda0} is an eigenvalue of A")));
    }
    if t.reference_extension().classify_point(c(lambda0, 0.0), tol)? != PointClass::Resolvent {
        return Err(Error::Precondition(format!("{lambda0} is not in the resolvent set of A0")));
    }
    let s_graph = LinearRelation::from_graph(&linalg::vstack(&[&w, &b.e_d()]), tol)?;
    let (s, q) = NondenseSymmetric::from_operator_graph(&s_graph, tol)?;
    let y = linalg::block2(
        &linalg::zeros(n, n),
        &linalg::eye(n),
        &linalg::eye(n),
        &linalg::scalar(n, c(lambda0, 0.0)),
    );
    let qq = linalg::block2(&q, &linalg::zeros(n, n), &linalg::zeros(n, n), &q);
    let yq = y * qq;
    let [g0, g1, g0t, g1t] = t.maps();
    let triplet = DualPairTriplet::new(s, g0 * &yq, -(g1 * &yq), g0t * &yq, -(g1t * &yq))?;
    Ok(MobiusTransform { lambda0, basis: q, triplet })
}

/// Largest distance after greedily pairing the closest remaining points; infinite
/// when the lists differ in length.
pub fn match_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut left: Vec<Complex64> = a.to_vec();
    let mut right: Vec<Complex64> = b.to_vec();
    let mut worst: f64 = 0.0;
    while !left.is_empty() {
        let mut best = (0, 0, f64::INFINITY);
        for (i, x) in left.iter().enumerate() {
            for (j, y) in right.iter().enumerate() {
                let d = (x - y).norm();
                if d < best.2 {
                    best = (i, j, d);
                }
            }
        }
        worst = worst.max(best.2);
        left.swap_remove(best.0);
        right.swap_remove(best.1);
    }
    worst
}

/// Random nondense symmetric model with d = n − k and a well-conditioned γ.
pub fn random_model(n: usize, k: usize, seed: u64, tol: f64) -> Result<OrdinaryTripletModel> {
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = n - k;
    let a00 = linalg::random_hermitian(d, &mut rng);
    let a10 = linalg::random_complex(k, d, &mut rng);
    let u = linalg::random_unitary(k, &mut rng);
    let v = linalg::random_unitary(k, &mut rng);
    let s: Vec<f64> = (0..k).map(|_| rng.random_range(0.5..2.0)).collect();
    let g = u * linalg::diag_real(&s) * v;
    OrdinaryTripletModel::new(NondenseSymmetric::new(a00, a10, tol)?, g)
}
