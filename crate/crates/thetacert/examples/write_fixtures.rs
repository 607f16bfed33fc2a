//! Regenerates the bundled JSON fixtures under `fixtures/`.
//!
//! Run with `cargo run --example write_fixtures`. Output is deterministic.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thetacert::char2::odd_characteristics;
use thetacert::pipeline::{HyperplaneFile, SCHEMA_VERSION};
use thetacert::synthetic::{elliptic_quartic, multitangent_genus5};
use thetacert::tangency_cert::HyperplaneCandidate;

fn curve_json(ideal_json: &str, id: &str) -> String {
    let mut v: serde_json::Value = serde_json::from_str(ideal_json).unwrap();
    v["schema"] = SCHEMA_VERSION.into();
    v["id"] = id.into();
    serde_json::to_string_pretty(&v).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::create_dir_all(dir).unwrap();
    fs::write(dir.join(name), format!("{text}\n")).unwrap();
    println!("wrote {}", dir.join(name).display());
}

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mc = multitangent_genus5(&mut rng);
    let label = odd_characteristics(5).unwrap()[0];
    let (cand, _) = HyperplaneCandidate::new(mc.hyperplane.clone(), mc.points.clone(), Some(label)).unwrap();
    let hf = HyperplaneFile { schema: Some(SCHEMA_VERSION), g: 5, hyperplanes: vec![cand] };
    let dir = root.join("genus5");
    write(&dir, "curve.json", &curve_json(&mc.ideal.to_json(), "synthetic-genus5"));
    write(&dir, "hyperplanes.json", &serde_json::to_string_pretty(&hf).unwrap());

    let dir = root.join("elliptic_quartic");
    write(&dir, "curve.json", &curve_json(&elliptic_quartic().to_json(), "elliptic-quartic"));
    let empty = HyperplaneFile { schema: Some(SCHEMA_VERSION), g: 4, hyperplanes: vec![] };
    write(&dir, "hyperplanes.json", &serde_json::to_string_pretty(&empty).unwrap());

    let g1 = json!({"schema": SCHEMA_VERSION, "g": 1, "tau": [[[0.1, 1.2]]], "tau1": [[[1.0, 0.0]]]});
    write(&root, "riemann_g1.json", &serde_json::to_string_pretty(&g1).unwrap());
    let g2 = json!({
        "schema": SCHEMA_VERSION,
        "g": 2,
        "tau": [[[0.3, 1.1], [-0.2, 0.4]], [[-0.2, 0.4], [0.1, 0.9]]],
        "tau1": [[[1.0, 0.2], [0.0, 0.1]], [[0.3, 0.0], [0.8, -0.4]]]
    });
    write(&root, "riemann_g2.json", &serde_json::to_string_pretty(&g2).unwrap());
}
