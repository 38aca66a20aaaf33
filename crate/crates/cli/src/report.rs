//! The machine-readable run report printed by `--json`.

use serde::Serialize;

use ddtep_core::engine::{AtomRow, Strategy};
use ddtep_core::GroundProgram;

#[derive(Debug, Default, Serialize)]
pub struct RunReport {
    pub command: String,
    pub program_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_eu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<AtomRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ties: Option<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Bounds>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<Fit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worlds: Option<Vec<WorldRow>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub duration_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct SearchInfo {
    pub method: &'static str,
    pub explored: usize,
    pub certified: bool,
}

#[derive(Debug, Serialize)]
pub struct Bounds {
    pub min: f64,
    pub argmin: Vec<String>,
    pub max: f64,
    pub argmax: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holds: Option<bool>,
}

#[derive(Debug, Serialize)]
pub struct FitParam {
    pub clause: String,
    pub value: f64,
}

#[derive(Debug, Serialize)]
pub struct Fit {
    pub params: Vec<FitParam>,
    pub loglik_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
pub struct WorldRow {
    pub probability: f64,
    /// Chosen outcome atom of every choice variable, `null` for "none".
    pub outcomes: Vec<Option<String>>,
    /// Whether each utility atom (in `atoms` order) holds in the world.
    pub membership: Vec<bool>,
}

/// Labels of the decisions a strategy takes.
pub fn labels(gp: &GroundProgram, strategy: &Strategy) -> Vec<String> {
    strategy.chosen_labels(gp)
}
