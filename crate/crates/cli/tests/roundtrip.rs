use std::fs;
use std::path::Path;

use proptest::prelude::*;
use weyl_cli::document::{AtomDef, Matrix, ObjectDef, ScenarioDocument};

#[test]
fn bundled_documents_round_trip() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    for e in fs::read_dir(dir).unwrap() {
        let text = fs::read_to_string(e.unwrap().path()).unwrap();
        let doc = ScenarioDocument::parse(&text).unwrap();
        assert_eq!(ScenarioDocument::parse(&doc.to_json()).unwrap(), doc);
    }
}

fn matrix(n: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(prop::collection::vec(prop::array::uniform2(-1e6f64..1e6), n), n)
}

proptest! {
    #[test]
    fn objects_round_trip(
        seed in any::<u64>(),
        b in matrix(2),
        k in matrix(2),
        point in -1e3f64..1e3,
        w in matrix(1),
        n in 1usize..9,
    ) {
        let mut doc = ScenarioDocument { version: 1, seed, tol: Some(1e-9), objects: Default::default(), tasks: vec![] };
        doc.objects.insert("s".into(), ObjectDef::Spec { b, k });
        doc.objects.insert("h".into(), ObjectDef::Herglotz {
            dim: 1, c: None, d: Some(w.clone()), atoms: vec![AtomDef { point, weight: w }],
            pieces: vec![], line_density: None, shift: None,
        });
        doc.objects.insert("r".into(), ObjectDef::RandomModel { n, k: 1, seed: Some(seed) });
        let back = ScenarioDocument::parse(&doc.to_json()).unwrap();
        prop_assert_eq!(back, doc);
    }
}
