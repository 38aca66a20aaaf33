//! The reference semantics: enumerate every world and compute its least model.

use super::{Engine, Evidence, Strategy};
use crate::error::{Error, Result};
use crate::ground::{AtomId, GroundProgram};

/// Default bound on the number of worlds the oracle will enumerate.
pub const DEFAULT_WORLD_CAP: u64 = 1 << 24;

/// One outcome index per choice variable and the product probability.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub outcomes: Vec<usize>,
    pub probability: f64,
}

/// Lazy enumeration of worlds in lexicographic order of outcome indices.
pub struct Worlds<'a> {
    gp: &'a GroundProgram,
    next: Option<Vec<usize>>,
}

impl Iterator for Worlds<'_> {
    type Item = World;

    fn next(&mut self) -> Option<World> {
        let current = self.next.take()?;
        let probability = current
            .iter()
            .zip(&self.gp.choices)
            .map(|(&o, c)| c.outcomes[o].probability)
            .product();
        let mut following = current.clone();
        for i in (0..following.len()).rev() {
            following[i] += 1;
            if following[i] < self.gp.choices[i].outcomes.len() {
                self.next = Some(following);
                break;
            }
            following[i] = 0;
        }
        Some(World {
            outcomes: current,
            probability,
        })
    }
}

/// Every world of the program, or an error when there are more than `cap`.
pub fn enumerate_worlds(gp: &GroundProgram, cap: u64) -> Result<Worlds<'_>> {
    let worlds = gp.world_count();
    if worlds > cap as f64 {
        return Err(Error::WorldCap { worlds, cap });
    }
    Ok(Worlds {
        gp,
        next: Some(vec![0; gp.choices.len()]),
    })
}

/// Rules indexed for bottom-up evaluation.
struct RuleIndex {
    /// Rule indices per stratum.
    strata: Vec<Vec<usize>>,
    /// Rules with a positive body literal on each atom.
    watchers: Vec<Vec<usize>>,
}

impl RuleIndex {
    fn new(gp: &GroundProgram) -> RuleIndex {
        let mut strata = vec![Vec::new(); gp.strata];
        let mut watchers = vec![Vec::new(); gp.atoms.len()];
        for (i, r) in gp.rules.iter().enumerate() {
            strata[r.stratum].push(i);
            for l in r.body.iter().filter(|l| !l.negated) {
                watchers[l.atom.index()].push(i);
            }
        }
        RuleIndex { strata, watchers }
    }

    fn least_model(&self, gp: &GroundProgram, outcomes: &[usize], decisions: &[bool]) -> Vec<bool> {
        let mut truth = vec![false; gp.atoms.len()];
        for &f in &gp.facts {
            truth[f.index()] = true;
        }
        for (c, &o) in gp.choices.iter().zip(outcomes) {
            if let Some(a) = c.outcomes[o].atom {
                truth[a.index()] = true;
            }
        }
        for (d, &v) in gp.decisions.iter().zip(decisions) {
            if v {
                truth[d.atom.index()] = true;
            }
        }

        let mut missing = vec![0usize; gp.rules.len()];
        let mut queue: Vec<AtomId> = Vec::new();
        for (s, rules) in self.strata.iter().enumerate() {
            for &r in rules {
                let rule = &gp.rules[r];
                // negated literals refer to lower strata, so their truth is final here
                let blocked = rule.body.iter().any(|l| l.negated && truth[l.atom.index()]);
                missing[r] = if blocked {
                    usize::MAX
                } else {
                    rule.body
                        .iter()
                        .filter(|l| !l.negated && !truth[l.atom.index()])
                        .count()
                };
            }
            // heads are set only after every count is taken, so that each derived atom is
            // discounted exactly once, by the queue below
            for &r in rules {
                let head = gp.rules[r].head;
                if missing[r] == 0 && !truth[head.index()] {
                    truth[head.index()] = true;
                    queue.push(head);
                }
            }
            while let Some(a) = queue.pop() {
                for &r in &self.watchers[a.index()] {
                    let rule = &gp.rules[r];
                    if rule.stratum != s || missing[r] == usize::MAX || missing[r] == 0 {
                        continue;
                    }
                    missing[r] -= 1;
                    if missing[r] == 0 && !truth[rule.head.index()] {
                        truth[rule.head.index()] = true;
                        queue.push(rule.head);
                    }
                }
            }
        }
        truth
    }
}

/// The least model of the program in one world under one decision assignment
/// (indexed by decision id), as a truth value per atom.
pub fn least_model(gp: &GroundProgram, world: &World, decisions: &[bool]) -> Vec<bool> {
    RuleIndex::new(gp).least_model(gp, &world.outcomes, decisions)
}

/// Exact inference by enumerating every world.
pub struct Oracle<'a> {
    gp: &'a GroundProgram,
    cap: u64,
    index: RuleIndex,
}

impl<'a> Oracle<'a> {
    pub fn new(gp: &'a GroundProgram) -> Oracle<'a> {
        Oracle::with_cap(gp, DEFAULT_WORLD_CAP)
    }

    pub fn with_cap(gp: &'a GroundProgram, cap: u64) -> Oracle<'a> {
        Oracle {
            gp,
            cap,
            index: RuleIndex::new(gp),
        }
    }

    pub fn worlds(&self) -> Result<Worlds<'a>> {
        enumerate_worlds(self.gp, self.cap)
    }

    pub fn model(&self, world: &World, decisions: &[bool]) -> Vec<bool> {
        self.index.least_model(self.gp, &world.outcomes, decisions)
    }

    /// Calls `visit` with every world and its least model under `strategy`.
    pub fn for_each_model(
        &self,
        strategy: &Strategy,
        mut visit: impl FnMut(&World, &[bool]),
    ) -> Result<()> {
        strategy.validate(self.gp)?;
        let decisions = strategy.decision_values(self.gp);
        for world in self.worlds()? {
            let model = self.model(&world, &decisions);
            visit(&world, &model);
        }
        Ok(())
    }
}

fn holds(model: &[bool], literals: &Evidence) -> bool {
    literals.iter().all(|&(a, t)| model[a.index()] == t)
}

impl Engine for Oracle<'_> {
    fn program(&self) -> &GroundProgram {
        self.gp
    }

    fn conditional(
        &self,
        strategy: &Strategy,
        query: &Evidence,
        evidence: &Evidence,
    ) -> Result<f64> {
        let mut both = 0.0;
        let mut given = 0.0;
        self.for_each_model(strategy, |world, model| {
            if holds(model, &self.gp.evidence) && holds(model, evidence) {
                given += world.probability;
                if holds(model, query) {
                    both += world.probability;
                }
            }
        })?;
        if given <= 0.0 {
            return Err(Error::InconsistentEvidence);
        }
        Ok(both / given)
    }

    fn utility_probabilities(&self, strategy: &Strategy) -> Result<Vec<f64>> {
        let mut sums = vec![0.0; self.gp.utilities.len()];
        let mut given = 0.0;
        self.for_each_model(strategy, |world, model| {
            if holds(model, &self.gp.evidence) {
                given += world.probability;
                for (s, u) in sums.iter_mut().zip(&self.gp.utilities) {
                    if model[u.atom.index()] {
                        *s += world.probability;
                    }
                }
            }
        })?;
        if given <= 0.0 {
            return Err(Error::InconsistentEvidence);
        }
        Ok(sums.into_iter().map(|s| s / given).collect())
    }

    fn violated_constraint(&self, strategy: &Strategy) -> Result<Option<usize>> {
        if self.gp.constraints.is_empty() {
            return Ok(None);
        }
        strategy.validate(self.gp)?;
        // constraint atoms never depend on choices, so any world decides them
        let outcomes = vec![0; self.gp.choices.len()];
        let model = self
            .index
            .least_model(self.gp, &outcomes, &strategy.decision_values(self.gp));
        Ok(self
            .gp
            .constraints
            .iter()
            .position(|c| c.body.iter().all(|l| model[l.atom.index()] != l.negated)))
    }
}
