//! Scenario documents: named object definitions plus an ordered task list.
//!
//! Complex scalars are `[re, im]`, matrices are row-major nested arrays of
//! scalars and intervals are `[a, b]`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const VERSION: u32 = 1;

pub type Scalar = [f64; 2];
pub type Matrix = Vec<Vec<Scalar>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default)]
    pub objects: BTreeMap<String, ObjectDef>,
    #[serde(default)]
    pub tasks: Vec<TaskDef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDef {
    pub point: f64,
    pub weight: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceDef {
    pub interval: [f64; 2],
    pub density: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectDef {
    /// F(z) = C + Dz + ∫ (1/(t−z) − t/(1+t²)) dΣ(t) + shift.
    Herglotz {
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<Matrix>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d: Option<Matrix>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        atoms: Vec<AtomDef>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        pieces: Vec<PieceDef>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        line_density: Option<Matrix>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shift: Option<Matrix>,
    },
    Spec {
        b: Matrix,
        k: Matrix,
    },
    Model {
        a00: Matrix,
        a10: Matrix,
        gamma: Matrix,
    },
    RandomModel {
        n: usize,
        k: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    System {
        a: Matrix,
        k: Matrix,
        f: Matrix,
    },
    RandomSystem {
        n: usize,
        k: usize,
        #[serde(default = "one")]
        spectral_radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default)]
        hermitian: bool,
    },
    /// V A V*, V K, F for a seeded random unitary V.
    ConjugateSystem {
        system: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// Same A and K, F shifted by `shift`·I.
    ShiftedSystem {
        system: String,
        shift: Scalar,
    },
    /// K*(B − F(z))⁻¹K for a function or model and a spec.
    Transform {
        function: String,
        spec: String,
    },
}

fn one() -> f64 {
    1.0
}

/// Probe points: an explicit list or a grid spec (see [`crate::grid`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Probes {
    Points(Vec<Scalar>),
    Grid(String),
}

/// A function (Herglotz object or model) paired with a transform spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairDef {
    pub function: String,
    pub spec: String,
    /// Replace (M, B, K) by (W*MW, W*BW, W*K) for a seeded random unitary W,
    /// and a model's state space by a random unitary image as well.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjugate_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CaseDef {
    A1 { window: [f64; 2] },
    A2,
    A3 { window: [f64; 2] },
    A4 { t0: f64, ys: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Equivalent,
    NotEquivalent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Op {
    MomentumGolden,
    HerglotzProbe {
        function: String,
        probes: Probes,
    },
    BasicLemma {
        left: PairDef,
        right: PairDef,
        probes: Probes,
    },
    FullEquality {
        left: PairDef,
        right: PairDef,
        upper: Probes,
        lower: Probes,
    },
    Counterexample {
        function: String,
        b1: Matrix,
        z0: Scalar,
        probes: Probes,
    },
    Uniqueness {
        left: PairDef,
        right: PairDef,
        case: CaseDef,
        probes: Probes,
    },
    Similarity {
        left: String,
        right: String,
        expect: Expectation,
    },
    TripletIdentities {
        model: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        spec: Option<String>,
        probes: Probes,
    },
    Spectrum {
        model: String,
        theta: Matrix,
    },
    SpectralMeasure {
        matrix: Matrix,
    },
    Stieltjes {
        function: String,
        window: [f64; 2],
        ys: Vec<f64>,
        expected: Matrix,
    },
    Characteristic {
        function: String,
        b: Matrix,
        k: Matrix,
        j: Matrix,
        probes: Probes,
        expected: Matrix,
    },
}

impl Op {
    pub fn name(&self) -> &'static str {
        match self {
            Op::MomentumGolden => "momentum_golden",
            Op::HerglotzProbe { .. } => "herglotz_probe",
            Op::BasicLemma { .. } => "basic_lemma",
            Op::FullEquality { .. } => "full_equality",
            Op::Counterexample { .. } => "counterexample",
            Op::Uniqueness { .. } => "uniqueness",
            Op::Similarity { .. } => "similarity",
            Op::TripletIdentities { .. } => "triplet_identities",
            Op::Spectrum { .. } => "spectrum",
            Op::SpectralMeasure { .. } => "spectral_measure",
            Op::Stieltjes { .. } => "stieltjes",
            Op::Characteristic { .. } => "characteristic",
        }
    }

    /// Object names the task refers to.
    pub fn references(&self) -> Vec<&str> {
        match self {
            Op::MomentumGolden | Op::SpectralMeasure { .. } => vec![],
            Op::HerglotzProbe { function, .. }
            | Op::Counterexample { function, .. }
            | Op::Stieltjes { function, .. }
            | Op::Characteristic { function, .. } => vec![function],
            Op::BasicLemma { left, right, .. }
            | Op::FullEquality { left, right, .. }
            | Op::Uniqueness { left, right, .. } => vec![&left.function, &left.spec, &right.function, &right.spec],
            Op::Similarity { left, right, .. } => vec![left, right],
            Op::TripletIdentities { model, spec, .. } => {
                let mut v = vec![model.as_str()];
                v.extend(spec.as_deref());
                v
            }
            Op::Spectrum { model, .. } => vec![model],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskDef {
    #[serde(flatten)]
    pub op: Op,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

impl ObjectDef {
    /// Other objects this definition is built from.
    pub fn references(&self) -> Vec<&str> {
        match self {
            ObjectDef::ConjugateSystem { system, .. } | ObjectDef::ShiftedSystem { system, .. } => vec![system],
            ObjectDef::Transform { function, spec } => vec![function, spec],
            _ => vec![],
        }
    }
}

impl ScenarioDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc: ScenarioDocument = serde_json::from_str(text)
            .map_err(|e| CliError::Parse { line: e.line(), column: e.column(), message: e.to_string() })?;
        if doc.version != VERSION {
            return Err(CliError::Input(format!("unsupported document version {}", doc.version)));
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    /// First reference that names no object, with the referring site.
    pub fn unresolved(&self) -> Option<(String, String)> {
        for (name, def) in &self.objects {
            if let Some(r) = def.references().into_iter().find(|r| !self.objects.contains_key(*r)) {
                return Some((format!("object {name}"), r.to_string()));
            }
        }
        for (i, task) in self.tasks.iter().enumerate() {
            if let Some(r) = task.op.references().into_iter().find(|r| !self.objects.contains_key(*r)) {
                return Some((format!("task {i} ({})", task.op.name()), r.to_string()));
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document() {
        let doc = ScenarioDocument::parse(r#"{"version": 1}"#).unwrap();
        assert!(doc.tasks.is_empty() && doc.objects.is_empty());
        assert_eq!(doc.seed, 0);
    }

    #[test]
    fn parse_error_has_position() {
        match ScenarioDocument::parse("{\n  \"version\": 1,\n  \"tasks\": [ {\"op\": \"nope\"} ]\n}") {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn version_checked() {
        assert!(matches!(ScenarioDocument::parse(r#"{"version": 7}"#), Err(CliError::Input(_))));
    }

    #[test]
    fn unresolved_names() {
        let doc = ScenarioDocument::parse(
            r#"{"version": 1, "tasks": [{"op": "herglotz_probe", "function": "ghost", "probes": [[0, 1]]}]}"#,
        )
        .unwrap();
        assert_eq!(doc.unresolved().unwrap().1, "ghost");
    }

    #[test]
    fn task_tolerance_is_flattened() {
        let doc =
            ScenarioDocument::parse(r#"{"version": 1, "tasks": [{"op": "momentum_golden", "tol": 1e-9}]}"#).unwrap();
        assert_eq!(doc.tasks[0].tol, Some(1e-9));
        assert_eq!(doc.tasks[0].op, Op::MomentumGolden);
    }
}
