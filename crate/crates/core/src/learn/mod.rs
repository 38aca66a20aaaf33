//! Parameter learning from partial interpretations with expectation maximization.

mod dataset;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use dataset::{parse_dataset, Dataset};

use crate::engine::bdd::NodeId;
use crate::engine::CircuitEngine;
use crate::error::{Error, Result};
use crate::ground::{ground, AtomId, GroundProgram};
use crate::syntax::CoreProgram;

/// Learned probabilities are kept inside `[EPSILON, 1 - EPSILON]`.
pub const EPSILON: f64 = 1e-9;

/// Expected counts from one E-step.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedCounts {
    /// Sum of posterior probabilities of the relevant ground instances, per parameter.
    pub counts: Vec<f64>,
    /// Number of relevant ground instances, per parameter.
    pub totals: Vec<f64>,
    /// Log-likelihood of the data at the parameters used.
    pub log_likelihood: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmOptions {
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
    /// Starting values per parameter id; defaults to the declared values.
    pub init: Option<Vec<f64>>,
}

impl Default for EmOptions {
    fn default() -> Self {
        EmOptions {
            max_iters: 100,
            tol: 1e-4,
            seed: 0,
            init: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    /// Learned probability per parameter id.
    pub params: Vec<f64>,
    /// Source clause of each parameter.
    pub clauses: Vec<String>,
    /// Statement index of each parameter's clause.
    pub origins: Vec<usize>,
    /// Log-likelihood before the first iteration and after each one.
    pub loglik_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
    pub warnings: Vec<String>,
}

struct Example {
    root: NodeId,
    /// `(parameter id, binary variable)` of every learnable instance the example depends on.
    instances: Vec<(usize, u32)>,
}

/// A ground program compiled once and re-weighted for every parameter vector.
struct Model<'g> {
    circuit: CircuitEngine<'g>,
    examples: Vec<Example>,
    params: usize,
}

impl<'g> Model<'g> {
    fn new(gp: &'g GroundProgram, dataset: &Dataset) -> Result<Model<'g>> {
        let circuit = CircuitEngine::new(gp)?;
        let mut examples = Vec::new();
        for (m, interpretation) in dataset.interpretations.iter().enumerate() {
            let mut literals: Vec<(AtomId, bool)> = Vec::new();
            for (atom, truth) in interpretation {
                match gp.lookup(atom) {
                    Some(id) => literals.push((id, *truth)),
                    // an atom outside the program can never be true
                    None if *truth => return Err(Error::ImpossibleEvidence { example: m + 1 }),
                    None => {}
                }
            }
            for &(a, _) in &literals {
                if let Some(&d) = circuit.decision_support(circuit.compile(a)).first() {
                    return Err(Error::DecisionDependentEvidence {
                        atom: gp.name(a),
                        decision: gp.name(gp.decisions[d].label),
                    });
                }
            }
            let root = circuit.conjunction(&literals)?;
            let cone = gp.dependency_cone(literals.iter().map(|l| l.0));
            let instances = gp
                .choices_within(&cone)
                .into_iter()
                .filter_map(|c| gp.choices[c].param.map(|p| (p, circuit.choice_vars(c)[0])))
                .collect();
            examples.push(Example { root, instances });
        }
        Ok(Model {
            circuit,
            examples,
            params: gp.params.len(),
        })
    }

    fn e_step(&mut self, params: &[f64]) -> Result<ExpectedCounts> {
        self.circuit.set_params(params);
        let mut out = ExpectedCounts {
            counts: vec![0.0; self.params],
            totals: vec![0.0; self.params],
            log_likelihood: 0.0,
        };
        for (m, ex) in self.examples.iter().enumerate() {
            let vars: Vec<u32> = ex.instances.iter().map(|i| i.1).collect();
            let (p, joint) = self.circuit.joint_with_vars(ex.root, &vars);
            if p <= 0.0 {
                return Err(Error::ImpossibleEvidence { example: m + 1 });
            }
            out.log_likelihood += p.ln();
            for (&(param, _), j) in ex.instances.iter().zip(joint) {
                out.counts[param] += j / p;
                out.totals[param] += 1.0;
            }
        }
        Ok(out)
    }
}

fn prepare(core: &CoreProgram, dataset: &Dataset) -> Result<GroundProgram> {
    if core.params.is_empty() {
        return Err(Error::NothingToLearn);
    }
    ground(core, &dataset.constants)
}

fn check_params(gp: &GroundProgram, params: &[f64]) -> Result<()> {
    if params.len() != gp.params.len() {
        return Err(Error::Unsupported(format!(
            "expected {} parameter values, got {}",
            gp.params.len(),
            params.len()
        )));
    }
    Ok(())
}

/// `Σ_m log P(evidence_m)` with the learnable parameters set to `params`.
pub fn log_likelihood(core: &CoreProgram, params: &[f64], dataset: &Dataset) -> Result<f64> {
    Ok(e_step(core, params, dataset)?.log_likelihood)
}

/// Expected number of true ground instances per parameter, over the instances each example
/// depends on.
pub fn e_step(core: &CoreProgram, params: &[f64], dataset: &Dataset) -> Result<ExpectedCounts> {
    let gp = prepare(core, dataset)?;
    check_params(&gp, params)?;
    Model::new(&gp, dataset)?.e_step(params)
}

/// Maximum-likelihood update from expected counts. Parameters without relevant instances
/// keep their `previous` value and produce a warning.
pub fn m_step(counts: &ExpectedCounts, previous: &[f64]) -> (Vec<f64>, Vec<String>) {
    let mut warnings = Vec::new();
    let params = counts
        .counts
        .iter()
        .zip(&counts.totals)
        .zip(previous)
        .enumerate()
        .map(|(i, ((&c, &n), &old))| {
            if n > 0.0 {
                (c / n).clamp(EPSILON, 1.0 - EPSILON)
            } else {
                warnings.push(format!(
                    "parameter {i} has no relevant instances; left unchanged"
                ));
                old
            }
        })
        .collect();
    (params, warnings)
}

/// Alternates E- and M-steps until no parameter moves by `tol` or more, or `max_iters`
/// iterations have run.
pub fn em_fit(core: &CoreProgram, dataset: &Dataset, options: &EmOptions) -> Result<FitResult> {
    let gp = prepare(core, dataset)?;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut theta: Vec<f64> = match &options.init {
        Some(init) => {
            check_params(&gp, init)?;
            init.clone()
        }
        None => gp
            .params
            .iter()
            .map(|p| p.value.unwrap_or_else(|| rng.random_range(0.1..0.9)))
            .collect(),
    };
    let mut model = Model::new(&gp, dataset)?;
    let mut stats = model.e_step(&theta)?;
    let mut trace = vec![stats.log_likelihood];
    let mut warnings = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..options.max_iters {
        let (next, _) = m_step(&stats, &theta);
        if iterations == 0 {
            warnings.extend(
                stats
                    .totals
                    .iter()
                    .zip(&gp.params)
                    .filter(|(&n, _)| n == 0.0)
                    .map(|(_, p)| {
                        format!("`{}` has no relevant instances; left unchanged", p.clause)
                    }),
            );
        }
        let delta = next
            .iter()
            .zip(&theta)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        theta = next;
        iterations += 1;
        stats = model.e_step(&theta)?;
        trace.push(stats.log_likelihood);
        if delta < options.tol {
            converged = true;
            break;
        }
    }
    Ok(FitResult {
        params: theta,
        clauses: gp.params.iter().map(|p| p.clause.clone()).collect(),
        origins: gp.params.iter().map(|p| p.origin).collect(),
        loglik_trace: trace,
        iterations,
        converged,
        seed: options.seed,
        warnings,
    })
}
