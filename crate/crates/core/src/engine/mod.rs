//! Expected-utility inference: a possible-world enumeration oracle and a compiled
//! decision-diagram engine that must agree with it.

pub mod bdd;
mod circuit;
mod oracle;

use serde::Serialize;

pub use circuit::CircuitEngine;
pub use oracle::{enumerate_worlds, least_model, Oracle, World, Worlds, DEFAULT_WORLD_CAP};

use crate::error::{Error, Result};
use crate::ground::{AtomId, GroundProgram};

/// One alternative per exactly-one group plus a truth value per free decision.
///
/// The derived order is the canonical strategy order: groups by alternative index first,
/// then free decisions (in program order) with `false` before `true`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Strategy {
    /// Chosen alternative index for each group.
    pub groups: Vec<usize>,
    /// Value of each free decision, in the program's free decision order.
    pub free: Vec<bool>,
}

impl Strategy {
    /// First alternative of every group, every free decision false.
    pub fn first(gp: &GroundProgram) -> Strategy {
        Strategy {
            groups: vec![0; gp.groups.len()],
            free: vec![false; gp.free_count()],
        }
    }

    /// Checks the shape against the program.
    pub fn validate(&self, gp: &GroundProgram) -> Result<()> {
        if self.groups.len() != gp.groups.len() || self.free.len() != gp.free_count() {
            return Err(Error::InvalidStrategy(format!(
                "expected {} group picks and {} free decisions",
                gp.groups.len(),
                gp.free_count()
            )));
        }
        for (g, &pick) in gp.groups.iter().zip(&self.groups) {
            if pick >= g.members.len() {
                return Err(Error::InvalidStrategy(format!(
                    "group {} has no alternative {pick}",
                    g.id
                )));
            }
        }
        Ok(())
    }

    /// Truth value of every decision variable, indexed by decision id.
    pub fn decision_values(&self, gp: &GroundProgram) -> Vec<bool> {
        let mut values = vec![false; gp.decisions.len()];
        for (g, &pick) in gp.groups.iter().zip(&self.groups) {
            values[g.members[pick]] = true;
        }
        for (d, &v) in gp.free_decisions().zip(&self.free) {
            values[d.id] = v;
        }
        values
    }

    /// Inverse of [`Strategy::decision_values`]; fails unless every group has exactly one pick.
    pub fn from_decision_values(gp: &GroundProgram, values: &[bool]) -> Result<Strategy> {
        let mut groups = Vec::with_capacity(gp.groups.len());
        for g in &gp.groups {
            let picked: Vec<usize> = (0..g.members.len())
                .filter(|&i| values[g.members[i]])
                .collect();
            match picked.as_slice() {
                [one] => groups.push(*one),
                _ => {
                    let names: Vec<String> = g
                        .members
                        .iter()
                        .map(|&d| gp.name(gp.decisions[d].label))
                        .collect();
                    return Err(Error::InvalidStrategy(format!(
                        "exactly one of {{{}}} must be chosen, got {}",
                        names.join(", "),
                        picked.len()
                    )));
                }
            }
        }
        let free = gp.free_decisions().map(|d| values[d.id]).collect();
        Ok(Strategy { groups, free })
    }

    /// Labels of the decisions taken, in decision order.
    pub fn chosen_labels(&self, gp: &GroundProgram) -> Vec<String> {
        self.decision_values(gp)
            .iter()
            .zip(&gp.decisions)
            .filter(|(v, _)| **v)
            .map(|(_, d)| gp.name(d.label))
            .collect()
    }
}

/// One utility atom in an expected-utility breakdown.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomRow {
    pub atom: String,
    pub probability: f64,
    pub reward: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EUReport {
    pub strategy: Strategy,
    /// One row per ground utility, in canonical atom order.
    pub atoms: Vec<AtomRow>,
    /// Sum of the contributions, accumulated in row order.
    pub total: f64,
}

impl EUReport {
    pub fn new(gp: &GroundProgram, strategy: Strategy, probabilities: &[f64]) -> EUReport {
        let atoms: Vec<AtomRow> = gp
            .utilities
            .iter()
            .zip(probabilities)
            .map(|(u, &probability)| AtomRow {
                atom: gp.name(u.atom),
                probability,
                reward: u.reward,
                contribution: probability * u.reward,
            })
            .collect();
        let total = atoms.iter().map(|r| r.contribution).sum();
        EUReport {
            strategy,
            atoms,
            total,
        }
    }
}

/// Literal-level query: `(atom, truth)` pairs.
pub type Evidence = [(AtomId, bool)];

/// Exact inference over one ground program.
pub trait Engine {
    fn program(&self) -> &GroundProgram;

    /// `P(query | evidence, program evidence)` under `strategy`, with query and evidence
    /// read as conjunctions.
    fn conditional(
        &self,
        strategy: &Strategy,
        query: &Evidence,
        evidence: &Evidence,
    ) -> Result<f64>;

    /// Probability of every ground utility atom, conditioned on the program's evidence.
    fn utility_probabilities(&self, strategy: &Strategy) -> Result<Vec<f64>>;

    /// Index of the first ground constraint the strategy violates.
    fn violated_constraint(&self, strategy: &Strategy) -> Result<Option<usize>>;

    fn marginal(&self, strategy: &Strategy, atom: AtomId, evidence: &Evidence) -> Result<f64> {
        self.conditional(strategy, &[(atom, true)], evidence)
    }

    fn check_admissible(&self, strategy: &Strategy) -> Result<()> {
        strategy.validate(self.program())?;
        match self.violated_constraint(strategy)? {
            Some(c) => Err(Error::ConstraintViolation {
                constraint: self.program().constraint_text(c),
            }),
            None => Ok(()),
        }
    }

    fn expected_utility(&self, strategy: &Strategy) -> Result<EUReport> {
        self.check_admissible(strategy)?;
        let probabilities = self.utility_probabilities(strategy)?;
        Ok(EUReport::new(
            self.program(),
            strategy.clone(),
            &probabilities,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_order_is_lexicographic() {
        let a = Strategy {
            groups: vec![0],
            free: vec![false, true],
        };
        let b = Strategy {
            groups: vec![0],
            free: vec![true, false],
        };
        let c = Strategy {
            groups: vec![1],
            free: vec![false, false],
        };
        assert!(a < b && b < c);
    }

    #[test]
    fn decision_values_round_trip() {
        let gp = crate::load("?::a;?::b;?::c. ?::x :- a. ?::y :- b.").unwrap();
        let s = Strategy {
            groups: vec![2],
            free: vec![true, false],
        };
        let values = s.decision_values(&gp);
        assert_eq!(values.iter().filter(|v| **v).count(), 2);
        assert_eq!(Strategy::from_decision_values(&gp, &values).unwrap(), s);
        assert_eq!(s.chosen_labels(&gp), ["c", "x"]);
        let mut bad = values.clone();
        bad[0] = true;
        assert!(Strategy::from_decision_values(&gp, &bad).is_err());
    }
}
