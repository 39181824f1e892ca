//! Matrix-valued measures on ℝ: finitely many atoms, piecewise-constant densities
//! and an optional constant density on the whole line.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{check_tol, Error, Result};
use crate::linalg::{self, c, CMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub point: f64,
    pub weight: CMatrix,
}

/// Constant density on the half-open interval `[start, end)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityPiece {
    pub start: f64,
    pub end: f64,
    pub density: CMatrix,
}

/// Operator measure with atoms, piecewise-constant densities and a line density.
///
/// A piece density is added to `line_density` on its interval; the total
/// density (piece plus line) and the line density itself are positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixMeasure {
    dim: usize,
    atoms: Vec<Atom>,
    pieces: Vec<DensityPiece>,
    line_density: CMatrix,
}

/// One piece of a bounded Borel set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SetPiece {
    Interval { start: f64, end: f64, closed_start: bool, closed_end: bool },
    Point(f64),
}

impl SetPiece {
    fn bounds(&self) -> (f64, f64, bool, bool) {
        match *self {
            SetPiece::Interval { start, end, closed_start, closed_end } => (start, end, closed_start, closed_end),
            SetPiece::Point(t) => (t, t, true, true),
        }
    }

    fn contains(&self, t: f64) -> bool {
        let (a, b, ca, cb) = self.bounds();
        (t > a || (ca && t == a)) && (t < b || (cb && t == b))
    }
}

/// Finite disjoint union of bounded intervals and points.
#[derive(Debug, Clone, PartialEq)]
pub struct BorelSet {
    pieces: Vec<SetPiece>,
}

impl BorelSet {
    pub fn new(mut pieces: Vec<SetPiece>) -> Result<Self> {
        for p in &pieces {
            let (a, b, _, _) = p.bounds();
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidSet(format!("unbounded piece [{a}, {b}]")));
            }
            if let SetPiece::Interval { .. } = p {
                if a >= b {
                    return Err(Error::InvalidSet(format!("empty or reversed interval [{a}, {b}]")));
                }
            }
        }
        pieces.sort_by(|p, q| p.bounds().0.total_cmp(&q.bounds().0));
        for w in pieces.windows(2) {
            let (_, b, _, cb) = w[0].bounds();
            let (a, _, ca, _) = w[1].bounds();
            if b > a || (b == a && cb && ca) {
                return Err(Error::InvalidSet(format!("pieces overlap near {a}")));
            }
        }
        Ok(BorelSet { pieces })
    }

    /// Half-open interval `[a, b)`.
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![SetPiece::Interval { start: a, end: b, closed_start: true, closed_end: false }])
    }

    pub fn closed(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![SetPiece::Interval { start: a, end: b, closed_start: true, closed_end: true }])
    }

    pub fn point(t: f64) -> Result<Self> {
        Self::new(vec![SetPiece::Point(t)])
    }

    pub fn pieces(&self) -> &[SetPiece] {
        &self.pieces
    }

    pub fn contains(&self, t: f64) -> bool {
        self.pieces.iter().any(|p| p.contains(t))
    }

    /// Lebesgue measure of the set.
    pub fn length(&self) -> f64 {
        self.pieces.iter().map(|p| p.bounds().1 - p.bounds().0).sum()
    }

    fn overlap(&self, a: f64, b: f64) -> f64 {
        self.pieces
            .iter()
            .map(|p| {
                let (s, e, _, _) = p.bounds();
                (e.min(b) - s.max(a)).max(0.0)
            })
            .sum()
    }
}

impl MatrixMeasure {
    pub fn new(
        dim: usize,
        mut atoms: Vec<Atom>,
        mut pieces: Vec<DensityPiece>,
        line_density: CMatrix,
        tol: f64,
    ) -> Result<Self> {
        check_tol(tol)?;
        if dim == 0 {
            return Err(Error::Empty("measure dimension"));
        }
        let shape = |m: &CMatrix, what: &str| {
            if m.nrows() == dim && m.ncols() == dim {
                Ok(())
            } else {
                Err(Error::Dimension(format!("{what} is {}x{}, expected {dim}x{dim}", m.nrows(), m.ncols())))
            }
        };
        shape(&line_density, "line density")?;
        linalg::check_psd(&line_density, tol)?;
        atoms.sort_by(|a, b| a.point.total_cmp(&b.point));
        for a in &atoms {
            shape(&a.weight, "atom weight")?;
            if !a.point.is_finite() {
                return Err(Error::InvalidArgument("atom at a non-finite point".into()));
            }
            linalg::check_psd(&a.weight, tol)?;
        }
        if atoms.windows(2).any(|w| w[0].point == w[1].point) {
            return Err(Error::InvalidArgument("atom points must be distinct".into()));
        }
        pieces.sort_by(|a, b| a.start.total_cmp(&b.start));
        for p in &pieces {
            shape(&p.density, "density")?;
            if !(p.start < p.end) || !p.start.is_finite() || !p.end.is_finite() {
                return Err(Error::InvalidArgument(format!("bad density interval [{}, {})", p.start, p.end)));
            }
            linalg::check_psd(&(&p.density + &line_density), tol)?;
        }
        if pieces.windows(2).any(|w| w[0].end > w[1].start) {
            return Err(Error::InvalidArgument("density intervals overlap".into()));
        }
        Ok(MatrixMeasure { dim, atoms, pieces, line_density })
    }

    pub fn zero(dim: usize) -> Self {
        MatrixMeasure { dim, atoms: Vec::new(), pieces: Vec::new(), line_density: linalg::zeros(dim, dim) }
    }

    /// `c·I` times Lebesgue measure.
    pub fn lebesgue(dim: usize, c0: f64) -> Self {
        MatrixMeasure { line_density: linalg::scalar(dim, c(c0, 0.0)), ..Self::zero(dim) }
    }

    pub fn atomic(dim: usize, atoms: Vec<Atom>, tol: f64) -> Result<Self> {
        Self::new(dim, atoms, Vec::new(), linalg::zeros(dim, dim), tol)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn pieces(&self) -> &[DensityPiece] {
        &self.pieces
    }

    pub fn line_density(&self) -> &CMatrix {
        &self.line_density
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.pieces.is_empty() && self.line_density.norm() == 0.0
    }

    /// Σ(δ) for a bounded Borel set δ.
    pub fn apply(&self, set: &BorelSet) -> CMatrix {
        let mut out = &self.line_density * c(set.length(), 0.0);
        for a in self.atoms.iter().filter(|a| set.contains(a.point)) {
            out += &a.weight;
        }
        for p in &self.pieces {
            let len = set.overlap(p.start, p.end);
            if len > 0.0 {
                out += &p.density * c(len, 0.0);
            }
        }
        out
    }

    /// Splits into the absolutely continuous and the singular (atomic) part.
    pub fn lebesgue_decompose(&self) -> (MatrixMeasure, MatrixMeasure) {
        let ac = MatrixMeasure { atoms: Vec::new(), ..self.clone() };
        let s = MatrixMeasure { atoms: self.atoms.clone(), ..Self::zero(self.dim) };
        (ac, s)
    }

    /// T Σ T* applied to every weight and density.
    pub fn congruence(&self, t: &CMatrix) -> MatrixMeasure {
        let cong = |m: &CMatrix| t * m * t.adjoint();
        MatrixMeasure {
            dim: t.nrows(),
            atoms: self.atoms.iter().map(|a| Atom { point: a.point, weight: cong(&a.weight) }).collect(),
            pieces: self
                .pieces
                .iter()
                .map(|p| DensityPiece { start: p.start, end: p.end, density: cong(&p.density) })
                .collect(),
            line_density: cong(&self.line_density),
        }
    }

    /// Multiplication by a nonnegative scalar.
    pub fn scale(&self, s: f64) -> MatrixMeasure {
        self.congruence(&linalg::scalar(self.dim, c(s.sqrt(), 0.0)))
    }

    /// Σ + L·m for a positive semidefinite line density L.
    pub fn add_line_density(&self, l: &CMatrix) -> MatrixMeasure {
        MatrixMeasure { line_density: &self.line_density + l, ..self.clone() }
    }

    /// Sorted endpoints of all density pieces.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.pieces.iter().flat_map(|p| [p.start, p.end]).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    fn piece_density_left(&self, t: f64) -> CMatrix {
        self.pieces
            .iter()
            .find(|p| p.start < t && t <= p.end)
            .map_or_else(|| linalg::zeros(self.dim, self.dim), |p| p.density.clone())
    }

    fn piece_density_right(&self, t: f64) -> CMatrix {
        self.pieces
            .iter()
            .find(|p| p.start <= t && t < p.end)
            .map_or_else(|| linalg::zeros(self.dim, self.dim), |p| p.density.clone())
    }

    /// Symmetric derivative of the absolutely continuous part at `t`
    /// (average of the one-sided densities).
    pub fn density_at(&self, t: f64) -> CMatrix {
        &self.line_density + (self.piece_density_left(t) + self.piece_density_right(t)) * c(0.5, 0.0)
    }

    fn window_cells(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let mut pts = vec![a, b];
        pts.extend(self.breakpoints().into_iter().filter(|&t| t > a && t < b));
        pts.sort_by(f64::total_cmp);
        pts.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// Whether the ac part is equivalent to Lebesgue measure on `[a, b]`:
    /// the density is positive definite everywhere on the window.
    pub fn lebesgue_equivalent_on(&self, a: f64, b: f64, tol: f64) -> bool {
        self.window_cells(a, b)
            .iter()
            .all(|&(s, e)| linalg::min_eigenvalue(&self.density_at(0.5 * (s + e))) > tol)
    }

    /// Whether the ac density vanishes nowhere on `[a, b]`.
    pub fn ac_support_covers(&self, a: f64, b: f64, tol: f64) -> bool {
        self.window_cells(a, b).iter().all(|&(s, e)| self.density_at(0.5 * (s + e)).norm() > tol)
    }

    fn on_support(&self, x: f64, tol: f64) -> bool {
        self.line_density.norm() > 0.0
            || self.atoms.iter().any(|a| (a.point - x).abs() <= tol * x.abs().max(1.0))
            || self.pieces.iter().any(|p| p.start - tol <= x && x <= p.end + tol)
    }

    /// ∫ (1/(t−z) − t/(1+t²)) dΣ(t) in closed form.
    pub fn cauchy_transform(&self, z: Complex64, tol: f64) -> Result<CMatrix> {
        if z.im == 0.0 && self.on_support(z.re, tol) {
            return Err(Error::OnSupport(z));
        }
        let one = c(1.0, 0.0);
        let mut out = linalg::zeros(self.dim, self.dim);
        for a in &self.atoms {
            let t = a.point;
            out += &a.weight * (one / (c(t, 0.0) - z) - c(t / (1.0 + t * t), 0.0));
        }
        for p in &self.pieces {
            let (a, b) = (p.start, p.end);
            let k = (c(b, 0.0) - z).ln() - (c(a, 0.0) - z).ln()
                - c(0.5 * ((1.0 + b * b) / (1.0 + a * a)).ln(), 0.0);
            out += &p.density * k;
        }
        if z.im != 0.0 {
            out += &self.line_density * c(0.0, PI * z.im.signum());
        }
        Ok(out)
    }

    /// ∫ y/((t−x)²+y²) dΣ(t) in closed form.
    pub fn poisson_transform(&self, x: f64, y: f64) -> Result<CMatrix> {
        if !(y > 0.0) {
            return Err(Error::InvalidArgument(format!("Poisson transform needs y > 0, got {y}")));
        }
        let mut out = &self.line_density * c(PI, 0.0);
        for a in &self.atoms {
            let d = a.point - x;
            out += &a.weight * c(y / (d * d + y * y), 0.0);
        }
        for p in &self.pieces {
            let k = ((p.end - x) / y).atan() - ((p.start - x) / y).atan();
            out += &p.density * c(k, 0.0);
        }
        Ok(out)
    }
}

/// Spectral measure E of a Hermitian matrix: atoms at the eigenvalues,
/// weights the eigenprojections. Eigenvalues closer than `tol·max(1, ‖H‖)` are merged.
pub fn spectral_measure(h: &CMatrix, tol: f64) -> Result<MatrixMeasure> {
    check_tol(tol)?;
    linalg::check_hermitian(h, tol)?;
    let n = h.nrows();
    if n == 0 {
        return Err(Error::Empty("matrix"));
    }
    let (values, vectors) = linalg::eigh(h);
    let gap = tol * linalg::norm2(h).max(1.0);
    let mut atoms = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        if i == n || values[i] - values[i - 1] > gap {
            let v = linalg::cols(&vectors, start, i - start);
            let point = values[start..i].iter().sum::<f64>() / (i - start) as f64;
            atoms.push(Atom { point, weight: &v * v.adjoint() });
            start = i;
        }
    }
    Ok(MatrixMeasure { dim: n, atoms, pieces: Vec::new(), line_density: linalg::zeros(n, n) })
}

/// Nonnegative continuous piecewise-linear function, constant beyond its outer knots.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    knots: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::Empty("knot list"));
        }
        if knots.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(Error::InvalidArgument("knots must be strictly increasing".into()));
        }
        if let Some(&(t, value)) = knots.iter().find(|k| !(k.1 >= 0.0)) {
            return Err(Error::NegativeWeight { t, value });
        }
        Ok(PiecewiseLinear { knots })
    }

    pub fn constant(v: f64) -> Result<Self> {
        Self::new(vec![(0.0, v)])
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = &self.knots;
        if t <= k[0].0 {
            return k[0].1;
        }
        if t >= k[k.len() - 1].0 {
            return k[k.len() - 1].1;
        }
        let i = k.partition_point(|p| p.0 <= t) - 1;
        let (t0, v0) = k[i];
        let (t1, v1) = k[i + 1];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }
}

/// Σ_φ(δ) = ∫_δ φ dΣ. Atoms are scaled exactly; densities are scaled by the
/// average of φ over each cell between breakpoints, which is exact for linear φ.
///
/// A line density requires φ to take the same value at both ends.
pub fn weight_measure(sigma: &MatrixMeasure, phi: &PiecewiseLinear) -> Result<MatrixMeasure> {
    let n = sigma.dim;
    let knots = phi.knots();
    let far = knots[0].1;
    let has_line = sigma.line_density.norm() > 0.0;
    if has_line && far != knots[knots.len() - 1].1 {
        return Err(Error::InvalidArgument(
            "weight must take equal values at both ends when the measure has a line density".into(),
        ));
    }
    let atoms = sigma
        .atoms
        .iter()
        .filter_map(|a| {
            let w = phi.eval(a.point);
            (w > 0.0).then(|| Atom { point: a.point, weight: &a.weight * c(w, 0.0) })
        })
        .collect();
    let mut pts = sigma.breakpoints();
    pts.extend(knots.iter().map(|k| k.0));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut pieces = Vec::new();
    for w in pts.windows(2) {
        let (u, v) = (w[0], w[1]);
        let avg = 0.5 * (phi.eval(u) + phi.eval(v));
        let base = sigma.piece_density_right(u);
        let mut d = &base * c(avg, 0.0);
        if has_line {
            d += &sigma.line_density * c(avg - far, 0.0);
        }
        if d.norm() > 0.0 {
            pieces.push(DensityPiece { start: u, end: v, density: d });
        }
    }
    let line_density = if has_line { &sigma.line_density * c(far, 0.0) } else { linalg::zeros(n, n) };
    Ok(MatrixMeasure { dim: n, atoms, pieces, line_density })
}

/// Largest weight mismatch between the atom lists, pairing atoms whose points
/// agree within `tol·max(1, |t|)`; unmatched atoms count with their full weight.
pub fn atom_residual(a: &MatrixMeasure, b: &MatrixMeasure, tol: f64) -> f64 {
    let mut worst: f64 = 0.0;
    let mut used = vec![false; b.atoms.len()];
    for x in &a.atoms {
        let found = b
            .atoms
            .iter()
            .enumerate()
            .find(|(j, y)| !used[*j] && (x.point - y.point).abs() <= tol * x.point.abs().max(1.0));
        match found {
            Some((j, y)) => {
                used[j] = true;
                worst = worst.max((&x.weight - &y.weight).norm());
            }
            None => worst = worst.max(x.weight.norm()),
        }
    }
    for (j, y) in b.atoms.iter().enumerate() {
        if !used[j] {
            worst = worst.max(y.weight.norm());
        }
    }
    worst
}

/// max over cells of ‖density_b − density_a − offset‖, on cells between the
/// breakpoints of both measures plus one unit cell beyond each end.
pub fn density_residual(a: &MatrixMeasure, b: &MatrixMeasure, offset: &CMatrix) -> f64 {
    let mut pts = a.breakpoints();
    pts.extend(b.breakpoints());
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if pts.is_empty() {
        pts.push(0.0);
    }
    let (lo, hi) = (pts[0] - 1.0, pts[pts.len() - 1] + 1.0);
    pts.insert(0, lo);
    pts.push(hi);
    pts.windows(2)
        .map(|w| {
            let m = 0.5 * (w[0] + w[1]);
            (b.density_at(m) - a.density_at(m) - offset).norm()
        })
        .fold(0.0, f64::max)
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F>(f: &F, a: f64, b: f64) -> Result<(CMatrix, f64)>
where
    F: Fn(f64) -> Result<CMatrix> + ?Sized,
{
    let h = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid)?;
    let mut kron = &fc * c(WGK[7], 0.0);
    let mut gauss = &fc * c(WG[3], 0.0);
    for j in 0..7 {
        let sum = f(mid - h * XGK[j])? + f(mid + h * XGK[j])?;
        kron += &sum * c(WGK[j], 0.0);
        if j % 2 == 1 {
            gauss += &sum * c(WG[j / 2], 0.0);
        }
    }
    let err = (&kron - &gauss).norm() * h;
    Ok((kron * c(h, 0.0), err))
}

/// Adaptive Gauss–Kronrod quadrature of a matrix-valued function.
/// Returns the integral and an error estimate.
pub fn integrate<F>(f: &F, a: f64, b: f64, abs_tol: f64, initial_cells: usize) -> Result<(CMatrix, f64)>
where
    F: Fn(f64) -> Result<CMatrix> + ?Sized,
{
    const MAX_CELLS: usize = 4000;
    let cells = initial_cells.max(1);
    let mut work: Vec<(f64, f64, CMatrix, f64)> = Vec::new();
    for i in 0..cells {
        let s = a + (b - a) * i as f64 / cells as f64;
        let e = a + (b - a) * (i + 1) as f64 / cells as f64;
        let (v, err) = gk15(f, s, e)?;
        work.push((s, e, v, err));
    }
    loop {
        let total_err: f64 = work.iter().map(|w| w.3).sum();
        if total_err <= abs_tol || work.len() >= MAX_CELLS {
            let mut sum = work[0].2.clone() * c(0.0, 0.0);
            for w in &work {
                sum += &w.2;
            }
            return Ok((sum, total_err));
        }
        let worst = (0..work.len()).max_by(|&i, &j| work[i].3.total_cmp(&work[j].3)).unwrap();
        let (s, e, _, _) = work.swap_remove(worst);
        let m = 0.5 * (s + e);
        let (v1, e1) = gk15(f, s, m)?;
        let (v2, e2) = gk15(f, m, e)?;
        work.push((s, m, v1, e1));
        work.push((m, e, v2, e2));
    }
}

/// Polynomial extrapolation to h = 0 through the points (hᵢ, vᵢ) by Neville's scheme.
/// The error estimate compares against the extrapolant that drops the first point.
pub fn extrapolate_to_zero(hs: &[f64], values: &[CMatrix]) -> (CMatrix, f64) {
    fn neville(hs: &[f64], values: &[CMatrix]) -> CMatrix {
        let mut p: Vec<CMatrix> = values.to_vec();
        let n = p.len();
        for m in 1..n {
            for i in 0..n - m {
                let (hi, hm) = (hs[i], hs[i + m]);
                p[i] = (&p[i] * c(-hm, 0.0) + &p[i + 1] * c(hi, 0.0)) / c(hi - hm, 0.0);
            }
        }
        p.swap_remove(0)
    }
    let full = neville(hs, values);
    if hs.len() < 2 {
        return (full, f64::INFINITY);
    }
    let reduced = neville(&hs[1..], &values[1..]);
    let err = (&full - &reduced).norm();
    (full, err)
}

/// Outcome of a Stieltjes inversion over a window.
#[derive(Debug, Clone)]
pub struct StieltjesEstimate {
    /// Extrapolated Σ(window).
    pub mass: CMatrix,
    pub error_estimate: f64,
    /// Whether the extrapolation error is within the requested tolerance.
    pub converged: bool,
    /// (y, (1/π)∫ Im F(x+iy) dx) for every y of the sequence.
    pub samples: Vec<(f64, CMatrix)>,
}

fn check_y_sequence(ys: &[f64]) -> Result<()> {
    if ys.is_empty() {
        return Err(Error::Empty("y sequence"));
    }
    if ys.iter().any(|&y| !(y > 0.0)) || ys.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::InvalidArgument("y sequence must be positive and strictly decreasing".into()));
    }
    Ok(())
}

/// Estimates Σ(window) from `im_f(x, y) = Im F(x+iy)` by integrating
/// (1/π) Im F over the window for each y and extrapolating to y = 0.
pub fn stieltjes_invert<F>(im_f: &F, window: (f64, f64), ys: &[f64], tol: f64) -> Result<StieltjesEstimate>
where
    F: Fn(f64, f64) -> Result<CMatrix> + ?Sized,
{
    check_tol(tol)?;
    check_y_sequence(ys)?;
    let (a, b) = window;
    if !(a < b) {
        return Err(Error::InvalidArgument(format!("empty window [{a}, {b}]")));
    }
    let mut samples = Vec::with_capacity(ys.len());
    for &y in ys {
        let g = |x: f64| im_f(x, y).map(|m| m / c(PI, 0.0));
        let cells = ((b - a) / y).clamp(1.0, 64.0) as usize;
        let (v, _) = integrate(&g, a, b, 1e-3 * tol, cells)?;
        samples.push((y, v));
    }
    let hs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let vals: Vec<CMatrix> = samples.iter().map(|s| s.1.clone()).collect();
    let (mass, error_estimate) = extrapolate_to_zero(&hs, &vals);
    Ok(StieltjesEstimate { mass, error_estimate, converged: error_estimate <= tol, samples })
}

/// Kind of mass found around a point.
#[derive(Debug, Clone)]
pub enum MassKind {
    Atom,
    Density,
}

/// Decides whether the mass near `center` concentrates (atom) or scales with the
/// window length (density), by halving a window of half-width `h` twice.
pub fn classify_mass<F>(im_f: &F, center: f64, h: f64, tol: f64) -> Result<MassKind>
where
    F: Fn(f64, f64) -> Result<CMatrix> + ?Sized,
{
    let mass = |w: f64| -> Result<f64> {
        let ys: Vec<f64> = [0.05, 0.025, 0.0125, 0.00625].iter().map(|s| s * w).collect();
        Ok(stieltjes_invert(im_f, (center - w, center + w), &ys, tol)?.mass.trace().re)
    };
    let half = mass(0.5 * h)?;
    let quarter = mass(0.25 * h)?;
    Ok(if half.abs() > 0.0 && quarter >= 0.75 * half { MassKind::Atom } else { MassKind::Density })
}

/// Diagnostics of a measure reconstruction.
#[derive(Debug, Clone)]
pub struct RecoveredMeasure {
    pub measure: MatrixMeasure,
    /// Largest extrapolation error over all cells.
    pub max_error_estimate: f64,
    pub converged: bool,
}

/// Reconstructs atoms and cell densities of Σ on `window` split into `cells`
/// equal cells. Assumes at most one atom per cell and no atom on a cell edge;
/// cells whose mass is below `tol` are dropped.
pub fn recover_measure<F>(im_f: &F, window: (f64, f64), cells: usize, tol: f64) -> Result<RecoveredMeasure>
where
    F: Fn(f64, f64) -> Result<CMatrix> + ?Sized,
{
    check_tol(tol)?;
    if cells == 0 {
        return Err(Error::Empty("cell grid"));
    }
    let (a, b) = window;
    let width = (b - a) / cells as f64;
    let ys: Vec<f64> = [0.05, 0.025, 0.0125, 0.00625].iter().map(|s| s * width).collect();
    let mut atoms: Vec<Atom> = Vec::new();
    let mut pieces = Vec::new();
    let mut max_err: f64 = 0.0;
    let mut dim = 0;
    let trace_im = |x: f64, y: f64| -> Result<f64> { Ok(im_f(x, y)?.trace().re) };
    for i in 0..cells {
        let (s, e) = (a + width * i as f64, a + width * (i + 1) as f64);
        let est = stieltjes_invert(im_f, (s, e), &ys, tol)?;
        dim = est.mass.nrows();
        max_err = max_err.max(est.error_estimate);
        if est.mass.norm() <= tol {
            continue;
        }
        // locate the peak of tr Im F just above the real line
        let y0 = width / 200.0;
        let grid = 200;
        let mut best = (s, f64::NEG_INFINITY);
        for j in 0..=grid {
            let x = s + width * j as f64 / grid as f64;
            let v = trace_im(x, y0)?;
            if v > best.1 {
                best = (x, v);
            }
        }
        let step = width / grid as f64;
        let mut x_peak = best.0;
        let mut span = step;
        let mut y = y0 / 100.0;
        for _ in 0..3 {
            x_peak = golden_max(&|x| trace_im(x, y), x_peak - span, x_peak + span)?;
            span = 4.0 * y;
            y /= 100.0;
        }
        let h = width / 4.0;
        let mut residual = est.mass.clone();
        if let MassKind::Atom = classify_mass(im_f, x_peak, h, tol)? {
            let yw: Vec<f64> = [1e-2, 5e-3, 2.5e-3, 1.25e-3].iter().map(|s| s * h).collect();
            let vals = yw
                .iter()
                .map(|&y| im_f(x_peak, y).map(|m| m * c(y, 0.0)))
                .collect::<Result<Vec<_>>>()?;
            let (w, _) = extrapolate_to_zero(&yw, &vals);
            let w = linalg::re_part(&w);
            if !atoms.iter().any(|t| (t.point - x_peak).abs() <= 1e-6 * width) {
                residual -= &w;
                atoms.push(Atom { point: x_peak, weight: w });
            }
        }
        let residual = linalg::re_part(&residual);
        if residual.norm() > tol {
            pieces.push(DensityPiece { start: s, end: e, density: residual / c(width, 0.0) });
        }
    }
    atoms.sort_by(|p, q| p.point.total_cmp(&q.point));
    let dim = dim.max(1);
    Ok(RecoveredMeasure {
        measure: MatrixMeasure { dim, atoms, pieces, line_density: linalg::zeros(dim, dim) },
        max_error_estimate: max_err,
        converged: max_err <= tol,
    })
}

fn golden_max<F: Fn(f64) -> Result<f64>>(f: &F, mut a: f64, mut b: f64) -> Result<f64> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * a.abs().max(b.abs()).max(1e-300) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
        }
    }
    Ok(0.5 * (a + b))
}
