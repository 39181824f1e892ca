//! Objects of a document, built once and looked up by name.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use weyl::equivalence::PipelineSide;
use weyl::herglotz::{weyl_transform, HerglotzMatrixFunction, WeylTransformSpec};
use weyl::linalg::{self, CMatrix};
use weyl::measures::{Atom, DensityPiece, MatrixMeasure};
use weyl::realization::{self, PqsSystem};
use weyl::triplets::{self, NondenseSymmetric, OrdinaryTripletModel};

use crate::document::{Matrix, ObjectDef, PairDef, ScenarioDocument};
use crate::error::CliError;

pub fn matrix(m: &Matrix, what: &str) -> Result<CMatrix, CliError> {
    let cols = m.first().map_or(0, Vec::len);
    if m.iter().any(|r| r.len() != cols) {
        return Err(CliError::Input(format!("{what}: rows have different lengths")));
    }
    if m.iter().flatten().any(|s| !s[0].is_finite() || !s[1].is_finite()) {
        return Err(CliError::Input(format!("{what}: non-finite entry")));
    }
    Ok(CMatrix::from_fn(m.len(), cols, |i, j| Complex64::new(m[i][j][0], m[i][j][1])))
}

fn matrix_or_zero(m: &Option<Matrix>, dim: usize, what: &str) -> Result<CMatrix, CliError> {
    match m {
        Some(m) => matrix(m, what),
        None => Ok(linalg::zeros(dim, dim)),
    }
}

#[derive(Debug, Clone)]
pub enum Object {
    Function(HerglotzMatrixFunction),
    Spec(WeylTransformSpec),
    Model(OrdinaryTripletModel),
    System(PqsSystem),
    Transform { function: Box<Object>, spec: WeylTransformSpec },
}

impl Object {
    pub fn kind(&self) -> &'static str {
        match self {
            Object::Function(_) => "herglotz function",
            Object::Spec(_) => "transform spec",
            Object::Model(_) => "model",
            Object::System(_) => "system",
            Object::Transform { .. } => "transform",
        }
    }

    /// Value at z for anything that is a matrix function.
    pub fn evaluate(&self, z: Complex64) -> weyl::Result<Option<CMatrix>> {
        Ok(Some(match self {
            Object::Function(f) => f.evaluate(z)?,
            Object::Model(m) => m.weyl(z)?,
            Object::System(s) => s.transfer_function(z)?,
            Object::Transform { function, spec } => match function.as_ref() {
                Object::Function(f) => weyl_transform(f, spec, z)?,
                Object::Model(m) => weyl_transform(m, spec, z)?,
                _ => return Ok(None),
            },
            Object::Spec(_) => return Ok(None),
        }))
    }
}

pub struct Workspace {
    objects: BTreeMap<String, Object>,
    pub seed: u64,
    pub tol: f64,
}

impl Workspace {
    /// Builds every object; names must resolve and definitions must be acyclic.
    pub fn build(doc: &ScenarioDocument, seed: u64, tol: f64) -> Result<Self, CliError> {
        if let Some((site, name)) = doc.unresolved() {
            return Err(CliError::Unresolved { site, name });
        }
        let mut ws = Workspace { objects: BTreeMap::new(), seed, tol };
        let mut active = BTreeSet::new();
        for name in doc.objects.keys() {
            ws.resolve(doc, name, &mut active)?;
        }
        Ok(ws)
    }

    fn default_seed(&self, name: &str) -> u64 {
        name.bytes().fold(self.seed, |h, b| h.wrapping_mul(31).wrapping_add(u64::from(b)))
    }

    fn resolve(&mut self, doc: &ScenarioDocument, name: &str, active: &mut BTreeSet<String>) -> Result<(), CliError> {
        if self.objects.contains_key(name) {
            return Ok(());
        }
        if !active.insert(name.to_string()) {
            return Err(CliError::Input(format!("object `{name}` is defined in terms of itself")));
        }
        let def = &doc.objects[name];
        for r in def.references() {
            self.resolve(doc, r, active)?;
        }
        let obj = self.construct(name, def).map_err(|e| match e {
            CliError::Core(c) => CliError::Input(format!("object `{name}`: {c}")),
            other => other,
        })?;
        active.remove(name);
        self.objects.insert(name.to_string(), obj);
        Ok(())
    }

    fn construct(&self, name: &str, def: &ObjectDef) -> Result<Object, CliError> {
        let tol = self.tol;
        Ok(match def {
            ObjectDef::Herglotz { dim, c, d, atoms, pieces, line_density, shift } => {
                let dim = *dim;
                let atoms = atoms
                    .iter()
                    .map(|a| Ok(Atom { point: a.point, weight: matrix(&a.weight, "atom weight")? }))
                    .collect::<Result<Vec<_>, CliError>>()?;
                let pieces = pieces
                    .iter()
                    .map(|p| {
                        Ok(DensityPiece {
                            start: p.interval[0],
                            end: p.interval[1],
                            density: matrix(&p.density, "density")?,
                        })
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                let line = matrix_or_zero(line_density, dim, "line_density")?;
                let measure = MatrixMeasure::new(dim, atoms, pieces, line, tol)?;
                Object::Function(HerglotzMatrixFunction::new(
                    matrix_or_zero(c, dim, "c")?,
                    matrix_or_zero(d, dim, "d")?,
                    measure,
                    matrix_or_zero(shift, dim, "shift")?,
                    tol,
                )?)
            }
            ObjectDef::Spec { b, k } => Object::Spec(WeylTransformSpec::new(matrix(b, "b")?, matrix(k, "k")?, tol)?),
            ObjectDef::Model { a00, a10, gamma } => {
                let base = NondenseSymmetric::new(matrix(a00, "a00")?, matrix(a10, "a10")?, tol)?;
                Object::Model(OrdinaryTripletModel::new(base, matrix(gamma, "gamma")?)?)
            }
            ObjectDef::RandomModel { n, k, seed } => {
                Object::Model(triplets::random_model(*n, *k, seed.unwrap_or_else(|| self.default_seed(name)), tol)?)
            }
            ObjectDef::System { a, k, f } => {
                Object::System(PqsSystem::new(matrix(a, "a")?, matrix(k, "k")?, matrix(f, "f")?, tol)?)
            }
            ObjectDef::RandomSystem { n, k, spectral_radius, seed, hermitian } => {
                let seed = seed.unwrap_or_else(|| self.default_seed(name));
                let make = if *hermitian { realization::random_hermitian_system } else { realization::random_system };
                Object::System(make(*n, *k, *spectral_radius, seed, tol)?)
            }
            ObjectDef::ConjugateSystem { system, seed } => {
                let s = self.system(system)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or_else(|| self.default_seed(name)));
                Object::System(s.conjugate(&linalg::random_unitary(s.state_dim(), &mut rng))?)
            }
            ObjectDef::ShiftedSystem { system, shift } => {
                let s = self.system(system)?;
                let f = s.f() + linalg::scalar(s.input_dim(), Complex64::new(shift[0], shift[1]));
                Object::System(PqsSystem::new(s.a().clone(), s.k().clone(), f, tol)?)
            }
            ObjectDef::Transform { function, spec } => {
                let f = self.get(function)?;
                if !matches!(f, Object::Function(_) | Object::Model(_)) {
                    return Err(CliError::Input(format!("`{function}` is a {}, not a function", f.kind())));
                }
                Object::Transform { function: Box::new(f.clone()), spec: self.spec(spec)? }
            }
        })
    }

    pub fn get(&self, name: &str) -> Result<&Object, CliError> {
        self.objects
            .get(name)
            .ok_or_else(|| CliError::Unresolved { site: "lookup".into(), name: name.to_string() })
    }

    fn wrong(name: &str, obj: &Object, want: &str) -> CliError {
        CliError::Input(format!("`{name}` is a {}, expected a {want}", obj.kind()))
    }

    pub fn spec(&self, name: &str) -> Result<WeylTransformSpec, CliError> {
        match self.get(name)? {
            Object::Spec(s) => Ok(s.clone()),
            o => Err(Self::wrong(name, o, "transform spec")),
        }
    }

    pub fn model(&self, name: &str) -> Result<OrdinaryTripletModel, CliError> {
        match self.get(name)? {
            Object::Model(m) => Ok(m.clone()),
            o => Err(Self::wrong(name, o, "model")),
        }
    }

    pub fn system(&self, name: &str) -> Result<PqsSystem, CliError> {
        match self.get(name)? {
            Object::System(s) => Ok(s.clone()),
            o => Err(Self::wrong(name, o, "system")),
        }
    }

    /// A Herglotz function, or the Weyl function of a model.
    pub fn function(&self, name: &str) -> Result<HerglotzMatrixFunction, CliError> {
        match self.get(name)? {
            Object::Function(f) => Ok(f.clone()),
            Object::Model(m) => Ok(m.weyl_herglotz()?),
            o => Err(Self::wrong(name, o, "herglotz function or model")),
        }
    }

    /// Function or model plus spec, conjugated by a seeded random unitary when asked.
    pub fn side(&self, pair: &PairDef) -> Result<PipelineSide, CliError> {
        let spec = self.spec(&pair.spec)?;
        let obj = self.get(&pair.function)?;
        let Some(seed) = pair.conjugate_seed else {
            return Ok(match obj {
                Object::Model(m) => PipelineSide::from_model(m.clone(), spec)?,
                _ => PipelineSide::from_function(self.function(&pair.function)?, spec),
            });
        };
        let k = spec.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = linalg::random_unitary(k, &mut rng);
        let spec2 = WeylTransformSpec::new(w.adjoint() * spec.b() * &w, w.adjoint() * spec.k(), self.tol)?;
        Ok(match obj {
            Object::Model(m) => {
                let v_d = linalg::random_unitary(m.base().d(), &mut rng);
                let v_n = linalg::random_unitary(k, &mut rng);
                PipelineSide::from_model(triplets::conjugate_model(m, &v_d, &v_n, &w)?, spec2)?
            }
            _ => PipelineSide::from_function(self.function(&pair.function)?.congruence(&w.adjoint()), spec2),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(json: &str) -> Result<Workspace, CliError> {
        Workspace::build(&ScenarioDocument::parse(json).unwrap(), 0, 1e-10)
    }

    #[test]
    fn ragged_matrix_rejected() {
        let m: Matrix = vec![vec![[1.0, 0.0]], vec![]];
        assert!(matrix(&m, "x").is_err());
    }

    #[test]
    fn transform_of_model() {
        let ws = build(
            r#"{"version": 1, "objects": {
                "m": {"kind": "model", "a00": [[[0, 0]]], "a10": [[[1, 0]]], "gamma": [[[1, 0]]]},
                "s": {"kind": "spec", "b": [[[0, 0]]], "k": [[[1, 0]]]},
                "t": {"kind": "transform", "function": "m", "spec": "s"}}}"#,
        )
        .unwrap();
        let z = Complex64::new(0.0, 2.0);
        let m = ws.get("m").unwrap().evaluate(z).unwrap().unwrap()[(0, 0)];
        let t = ws.get("t").unwrap().evaluate(z).unwrap().unwrap()[(0, 0)];
        assert!((m - (z - 1.0 / z)).norm() < 1e-14);
        assert!((t - (-z / (z * z - 1.0))).norm() < 1e-14);
    }

    #[test]
    fn cycles_and_kinds() {
        let cyc = r#"{"version": 1, "objects": {
            "a": {"kind": "conjugate_system", "system": "b"},
            "b": {"kind": "conjugate_system", "system": "a"}}}"#;
        assert!(matches!(build(cyc), Err(CliError::Input(_))));
        let kind = r#"{"version": 1, "objects": {
            "s": {"kind": "spec", "b": [[[0, 0]]], "k": [[[1, 0]]]},
            "t": {"kind": "transform", "function": "s", "spec": "s"}}}"#;
        assert!(matches!(build(kind), Err(CliError::Input(_))));
    }

    #[test]
    fn seeds_are_reproducible() {
        let doc = r#"{"version": 1, "seed": 5, "objects": {"r": {"kind": "random_system", "n": 4, "k": 2}}}"#;
        let (a, b) = (build(doc).unwrap(), build(doc).unwrap());
        assert_eq!(a.system("r").unwrap().a(), b.system("r").unwrap().a());
    }
}
