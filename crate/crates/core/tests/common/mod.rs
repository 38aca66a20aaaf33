#![allow(dead_code)]

use std::path::PathBuf;

use ddtep_core::engine::{CircuitEngine, Engine, Strategy};
use ddtep_core::syntax::parse_atom;
use ddtep_core::GroundProgram;

pub const CORPUS: [&str; 10] = [
    "car",
    "cake",
    "cake_people",
    "cake_likes",
    "cake_likes_expensive_ask",
    "burning_room",
    "archives",
    "archives_learned",
    "archives_learn",
    "impact_evidence",
];

/// Corpus programs with decisions or utilities (everything except the dataset).
pub const PROGRAMS: [&str; 9] = [
    "car",
    "cake",
    "cake_people",
    "cake_likes",
    "cake_likes_expensive_ask",
    "burning_room",
    "archives",
    "archives_learned",
    "archives_learn",
];

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(format!("{name}.ddtep"))
}

pub fn source(name: &str) -> String {
    std::fs::read_to_string(corpus_path(name)).unwrap()
}

pub fn load(name: &str) -> GroundProgram {
    ddtep_core::load(&source(name)).unwrap()
}

/// Strategy taking exactly the decisions whose labels are listed.
pub fn strategy(gp: &GroundProgram, labels: &[&str]) -> Strategy {
    let mut values = vec![false; gp.decisions.len()];
    for label in labels {
        let atom = gp.lookup(&parse_atom(label).unwrap()).unwrap();
        let d = gp
            .decisions
            .iter()
            .find(|d| d.label == atom)
            .unwrap_or_else(|| panic!("no decision {label}"));
        values[d.id] = true;
    }
    Strategy::from_decision_values(gp, &values).unwrap()
}

pub fn eu(gp: &GroundProgram, labels: &[&str]) -> f64 {
    let engine = CircuitEngine::new(gp).unwrap();
    engine
        .expected_utility(&strategy(gp, labels))
        .unwrap()
        .total
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() < tol
}
