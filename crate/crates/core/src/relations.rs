//! Linear relations in finite dimension: subspaces of ℂⁿ ⊕ ℂᵐ with graph algebra.

use num_complex::Complex64;

use crate::error::{check_tol, Error, Result};
use crate::linalg::{self, CMatrix, CVector};

/// A subspace of ℂⁿ stored by an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: CMatrix,
}

impl Subspace {
    /// Column span of `spanning`, with rank decided by `tol`.
    pub fn span(spanning: &CMatrix, tol: f64) -> Result<Self> {
        check_tol(tol)?;
        Ok(Subspace { basis: linalg::orth(spanning, tol) })
    }

    pub(crate) fn from_orthonormal(basis: CMatrix) -> Self {
        Subspace { basis }
    }

    pub fn zero(n: usize) -> Self {
        Subspace { basis: linalg::zeros(n, 0) }
    }

    pub fn full(n: usize) -> Self {
        Subspace { basis: linalg::eye(n) }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn projector(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }

    pub fn orthonormality_residual(&self) -> f64 {
        (self.basis.adjoint() * &self.basis - linalg::eye(self.dim())).norm()
    }

    /// Distance of `v` from the subspace.
    pub fn residual_of(&self, v: &CVector) -> f64 {
        (v - &self.basis * (self.basis.adjoint() * v)).norm()
    }

    pub fn contains_vector(&self, v: &CVector, tol: f64) -> bool {
        self.residual_of(v) <= tol * v.norm().max(1.0)
    }

    /// Largest distance of a unit vector of `other` from `self`.
    pub fn excess(&self, other: &Subspace) -> f64 {
        if other.dim() == 0 {
            return 0.0;
        }
        linalg::norm2(&(&other.basis - &self.basis * (self.basis.adjoint() * &other.basis)))
    }

    pub fn contains(&self, other: &Subspace, tol: f64) -> bool {
        other.dim() <= self.dim() && self.excess(other) <= tol
    }

    /// Sine of the largest principal angle; infinite when dimensions differ.
    pub fn distance(&self, other: &Subspace) -> f64 {
        linalg::span_distance(&self.basis, &other.basis)
    }

    pub fn equals(&self, other: &Subspace, tol: f64) -> bool {
        self.distance(other) <= tol
    }

    pub fn orthogonal_complement(&self) -> Subspace {
        Subspace { basis: linalg::complement(&self.basis) }
    }

    pub fn sum(&self, other: &Subspace, tol: f64) -> Subspace {
        Subspace { basis: linalg::orth(&linalg::hstack(&[&self.basis, &other.basis]), tol) }
    }

    pub fn intersection(&self, other: &Subspace, tol: f64) -> Subspace {
        self.orthogonal_complement()
            .sum(&other.orthogonal_complement(), tol)
            .orthogonal_complement()
    }

    /// Image under a linear map.
    pub fn map(&self, m: &CMatrix, tol: f64) -> Subspace {
        Subspace { basis: linalg::orth(&(m * &self.basis), tol) }
    }
}

/// Classification of a spectral parameter relative to a square relation.
///
/// `ContinuousSpectrum` exists for completeness and is never produced: in finite
/// dimension a proper range is never dense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointClass {
    Resolvent,
    PointSpectrum,
    ResidualSpectrum,
    ContinuousSpectrum,
}

/// A subspace of ℂ^dim_in ⊕ ℂ^dim_out.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRelation {
    dim_in: usize,
    dim_out: usize,
    graph: Subspace,
    tol: f64,
}

/// Domain, range, kernel and multivalued part.
#[derive(Debug, Clone)]
pub struct RelationParts {
    pub dom: Subspace,
    pub ran: Subspace,
    pub ker: Subspace,
    pub mul: Subspace,
}

impl LinearRelation {
    /// Relation in ℂⁿ ⊕ ℂⁿ spanned by the columns of `basis_matrix` (2n rows).
    pub fn from_graph(basis_matrix: &CMatrix, tol: f64) -> Result<Self> {
        if basis_matrix.nrows() % 2 != 0 {
            return Err(Error::Dimension(format!(
                "graph basis has {} rows, expected an even number",
                basis_matrix.nrows()
            )));
        }
        let n = basis_matrix.nrows() / 2;
        Self::from_graph_rect(n, n, basis_matrix, tol)
    }

    pub fn from_graph_rect(dim_in: usize, dim_out: usize, basis_matrix: &CMatrix, tol: f64) -> Result<Self> {
        check_tol(tol)?;
        if basis_matrix.nrows() == 0 || basis_matrix.ncols() == 0 {
            return Err(Error::Empty("graph basis matrix"));
        }
        if basis_matrix.nrows() != dim_in + dim_out {
            return Err(Error::Dimension(format!(
                "graph basis has {} rows, expected {}",
                basis_matrix.nrows(),
                dim_in + dim_out
            )));
        }
        Ok(LinearRelation { dim_in, dim_out, graph: Subspace::span(basis_matrix, tol)?, tol })
    }

    pub(crate) fn from_subspace(dim_in: usize, dim_out: usize, graph: Subspace, tol: f64) -> Self {
        debug_assert_eq!(graph.ambient_dim(), dim_in + dim_out);
        LinearRelation { dim_in, dim_out, graph, tol }
    }

    /// Graph {(f, Mf)} of a matrix.
    pub fn graph_of(m: &CMatrix, tol: f64) -> Result<Self> {
        let basis = linalg::vstack(&[&linalg::eye(m.ncols()), m]);
        Self::from_graph_rect(m.ncols(), m.nrows(), &basis, tol)
    }

    /// The trivial relation {(0, 0)}.
    pub fn zero(n: usize, tol: f64) -> Result<Self> {
        check_tol(tol)?;
        Ok(LinearRelation { dim_in: n, dim_out: n, graph: Subspace::zero(2 * n), tol })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn dim(&self) -> usize {
        self.graph.dim()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn graph(&self) -> &Subspace {
        &self.graph
    }

    fn top(&self) -> CMatrix {
        linalg::rows(self.graph.basis(), 0, self.dim_in)
    }

    fn bottom(&self) -> CMatrix {
        linalg::rows(self.graph.basis(), self.dim_in, self.dim_out)
    }

    /// T* = {(g, g′) : ⟨f′, g⟩ = ⟨f, g′⟩ for all (f, f′) ∈ T}.
    pub fn adjoint(&self) -> LinearRelation {
        let w = linalg::complement(self.graph.basis());
        let a = linalg::rows(&w, 0, self.dim_in);
        let b = linalg::rows(&w, self.dim_in, self.dim_out);
        let basis = linalg::vstack(&[&b, &(-a)]);
        LinearRelation {
            dim_in: self.dim_out,
            dim_out: self.dim_in,
            graph: Subspace::from_orthonormal(basis),
            tol: self.tol,
        }
    }

    pub fn inverse(&self) -> LinearRelation {
        let basis = linalg::vstack(&[&self.bottom(), &self.top()]);
        LinearRelation {
            dim_in: self.dim_out,
            dim_out: self.dim_in,
            graph: Subspace::from_orthonormal(basis),
            tol: self.tol,
        }
    }

    pub fn parts(&self) -> RelationParts {
        let (top, bottom, tol) = (self.top(), self.bottom(), self.tol);
        let ker = &top * linalg::null_space(&bottom, tol);
        let mul = &bottom * linalg::null_space(&top, tol);
        RelationParts {
            dom: Subspace::from_orthonormal(linalg::orth(&top, tol)),
            ran: Subspace::from_orthonormal(linalg::orth(&bottom, tol)),
            ker: Subspace::from_orthonormal(linalg::orth(&ker, tol)),
            mul: Subspace::from_orthonormal(linalg::orth(&mul, tol)),
        }
    }

    /// Whether (f, f′) lies in the graph.
    pub fn contains_pair(&self, f: &CVector, fp: &CVector) -> bool {
        self.graph.contains_vector(&stack_pair(f, fp), self.tol)
    }

    pub fn pair_residual(&self, f: &CVector, fp: &CVector) -> f64 {
        self.graph.residual_of(&stack_pair(f, fp))
    }

    pub fn contains(&self, other: &LinearRelation, tol: f64) -> bool {
        self.dim_in == other.dim_in && self.dim_out == other.dim_out && self.graph.contains(&other.graph, tol)
    }

    pub fn equals(&self, other: &LinearRelation, tol: f64) -> bool {
        self.dim_in == other.dim_in && self.dim_out == other.dim_out && self.graph.equals(&other.graph, tol)
    }

    pub fn distance(&self, other: &LinearRelation) -> f64 {
        if self.dim_in != other.dim_in || self.dim_out != other.dim_out {
            return f64::INFINITY;
        }
        self.graph.distance(&other.graph)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.dim_in == self.dim_out && self.adjoint().contains(self, tol)
    }

    pub fn is_selfadjoint(&self, tol: f64) -> bool {
        self.dim_in == self.dim_out && self.adjoint().equals(self, tol)
    }

    /// The matrix of T when T is an everywhere defined operator.
    pub fn as_operator(&self) -> Option<CMatrix> {
        let top = self.top();
        if self.dim() != self.dim_in || linalg::rank(&top, self.tol) != self.dim_in {
            return None;
        }
        let inv = top.try_inverse()?;
        Some(self.bottom() * inv)
    }

    /// Image of the graph under the map (f, f′) ↦ (Uf, Uf′).
    pub fn transform(&self, u: &CMatrix) -> Result<LinearRelation> {
        if self.dim_in != self.dim_out || u.ncols() != self.dim_in || u.nrows() != u.ncols() {
            return Err(Error::Dimension("transform needs a square map on a square relation".into()));
        }
        let z = linalg::zeros(u.nrows(), u.ncols());
        let big = linalg::block2(u, &z, &z, u);
        Ok(LinearRelation { graph: self.graph.map(&big, self.tol), ..self.clone() })
    }

    /// Classifies λ from the ranks of T − λ.
    pub fn classify_point(&self, lambda: Complex64, tol: f64) -> Result<PointClass> {
        check_tol(tol)?;
        if self.dim_in != self.dim_out {
            return Err(Error::Dimension("classify_point needs a square relation".into()));
        }
        let shifted = self.bottom() - self.top() * lambda;
        let rank = linalg::rank(&shifted, tol);
        let ker_dim = self.dim() - rank;
        Ok(if ker_dim > 0 {
            PointClass::PointSpectrum
        } else if rank == self.dim_out {
            PointClass::Resolvent
        } else {
            PointClass::ResidualSpectrum
        })
    }
}

pub(crate) fn stack_pair(f: &CVector, fp: &CVector) -> CVector {
    let mut v = CVector::zeros(f.len() + fp.len());
    v.rows_mut(0, f.len()).copy_from(f);
    v.rows_mut(f.len(), fp.len()).copy_from(fp);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, from_real, DEFAULT_TOL};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e(n: usize, i: usize) -> CMatrix {
        let mut m = linalg::zeros(n, 1);
        m[(i, 0)] = c(1.0, 0.0);
        m
    }

    #[test]
    fn identity_graph_parts() {
        let t = LinearRelation::graph_of(&linalg::eye(2), DEFAULT_TOL).unwrap();
        let p = t.parts();
        assert_eq!((p.dom.dim(), p.ran.dim(), p.ker.dim(), p.mul.dim()), (2, 2, 0, 0));
    }

    #[test]
    fn pure_multivalued_part() {
        let basis = from_real(2, 1, &[0.0, 1.0]);
        let t = LinearRelation::from_graph(&basis, DEFAULT_TOL).unwrap();
        let p = t.parts();
        assert_eq!((p.dom.dim(), p.mul.dim()), (0, 1));
        let adj = t.adjoint();
        assert_eq!(adj.dim(), 1);
        // g must be orthogonal to every f′, g′ is free
        assert!(adj.contains_pair(&CVector::from_element(1, c(0.0, 0.0)), &CVector::from_element(1, c(5.0, 1.0))));
        assert!(adj.equals(&t, 1e-12));
        assert!(adj.adjoint().equals(&t, 1e-12));
    }

    #[test]
    fn swap_is_selfadjoint() {
        let t = LinearRelation::graph_of(&from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]), DEFAULT_TOL).unwrap();
        assert!(t.is_selfadjoint(1e-12));
        let p = t.parts();
        assert_eq!((p.dom.dim(), p.ran.dim()), (2, 2));
    }

    #[test]
    fn zero_operator_parts() {
        let t = LinearRelation::graph_of(&linalg::zeros(2, 2), DEFAULT_TOL).unwrap();
        let p = t.parts();
        assert_eq!((p.ran.dim(), p.ker.dim()), (0, 2));
    }

    #[test]
    fn restriction_adjoint_splits() {
        // A = [[0],[1]] on span e₁ inside ℂ²
        let a = LinearRelation::from_graph(&linalg::vstack(&[&e(2, 0), &e(2, 1)]), DEFAULT_TOL).unwrap();
        let adj = a.adjoint();
        assert_eq!(adj.dim(), 3);
        let p = adj.parts();
        assert!(p.mul.equals(&Subspace::from_orthonormal(e(2, 1)), 1e-12));
        assert!(a.is_symmetric(1e-12));
        assert!(!a.is_selfadjoint(1e-12));
    }

    #[test]
    fn classify_diagonal() {
        let t = LinearRelation::graph_of(&linalg::diag_real(&[1.0, 2.0]), DEFAULT_TOL).unwrap();
        assert_eq!(t.classify_point(c(3.0, 0.0), DEFAULT_TOL).unwrap(), PointClass::Resolvent);
        assert_eq!(t.classify_point(c(1.0, 0.0), DEFAULT_TOL).unwrap(), PointClass::PointSpectrum);
    }

    #[test]
    fn classify_nondense_point() {
        let basis = linalg::vstack(&[&e(2, 0), &linalg::zeros(2, 1)]);
        let t = LinearRelation::from_graph(&basis, DEFAULT_TOL).unwrap();
        assert_eq!(t.classify_point(c(0.0, 0.0), DEFAULT_TOL).unwrap(), PointClass::PointSpectrum);
        assert_eq!(t.classify_point(c(1.0, 0.0), DEFAULT_TOL).unwrap(), PointClass::ResidualSpectrum);
    }

    #[test]
    fn constructor_errors() {
        assert!(matches!(
            LinearRelation::from_graph(&linalg::eye(2), 0.0),
            Err(Error::InvalidTolerance(_))
        ));
        assert!(matches!(LinearRelation::from_graph(&linalg::zeros(0, 0), 1e-10), Err(Error::Empty(_))));
        assert!(LinearRelation::from_graph(&linalg::eye(3), 1e-10).is_err());
    }

    #[test]
    fn intersection_of_planes() {
        let a = Subspace::span(&from_real(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]), 1e-10).unwrap();
        let b = Subspace::span(&from_real(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]), 1e-10).unwrap();
        let x = a.intersection(&b, 1e-10);
        assert!(x.equals(&Subspace::from_orthonormal(e(3, 0)), 1e-12));
    }

    fn random_relation(seed: u64, n: usize, m: usize, r: usize) -> LinearRelation {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let basis = linalg::random_complex(n + m, r, &mut rng);
        LinearRelation::from_graph_rect(n, m, &basis, DEFAULT_TOL).unwrap()
    }

    proptest! {
        #[test]
        fn adjoint_is_an_involution(seed in any::<u64>(), n in 1usize..5, m in 1usize..5, r in 1usize..6) {
            let t = random_relation(seed, n, m, r.min(n + m));
            let adj = t.adjoint();
            prop_assert_eq!(t.dim() + adj.dim(), n + m);
            prop_assert!(adj.adjoint().equals(&t, 1e-9));
        }

        #[test]
        fn rank_identities(seed in any::<u64>(), n in 1usize..5, r in 1usize..8) {
            let t = random_relation(seed, n, n, r.min(2 * n));
            let p = t.parts();
            prop_assert_eq!(p.ker.dim() + p.ran.dim(), t.dim());
            prop_assert_eq!(p.dom.dim() + p.mul.dim(), t.dim());
        }

        #[test]
        fn point_spectrum_at_eigenvalues(seed in any::<u64>(), n in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = linalg::random_hermitian(n, &mut rng);
            let t = LinearRelation::graph_of(&h, DEFAULT_TOL).unwrap();
            let (eig, _) = linalg::eigh(&h);
            for &l in &eig {
                prop_assert_eq!(t.classify_point(c(l, 0.0), 1e-8).unwrap(), PointClass::PointSpectrum);
            }
            prop_assert_eq!(t.classify_point(c(0.3, 0.7), 1e-8).unwrap(), PointClass::Resolvent);
        }
    }
}
