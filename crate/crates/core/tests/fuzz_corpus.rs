//! Every checked-in fuzz seed must parse.

use std::fs;
use std::path::PathBuf;

use energy_core::bodies::BodySpec;
use energy_core::discrete_energy::SignedAtomicMeasure;
use energy_core::points::PointSet;

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            let text = fs::read_to_string(&path).unwrap();
            (path, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn points_csv_seeds() {
    for (path, text) in seeds("points_csv") {
        PointSet::from_csv_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn measure_csv_seeds() {
    for (path, text) in seeds("measure_csv") {
        SignedAtomicMeasure::from_csv_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn measure_json_seeds() {
    for (path, text) in seeds("measure_json") {
        SignedAtomicMeasure::from_json_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn body_json_seeds() {
    for (path, text) in seeds("body_json") {
        BodySpec::from_json_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}
