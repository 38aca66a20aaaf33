use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write;

use super::stratify::{stratify, Dependency};
use crate::error::{Error, Result};
use crate::syntax::{Atom, Number, Term};

/// Index of an interned ground atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomId(pub u32);

impl AtomId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Ground atoms interned in canonical (sorted) order.
#[derive(Debug, Clone, Default)]
pub struct AtomTable {
    atoms: Vec<Atom>,
    index: HashMap<Atom, AtomId>,
}

impl AtomTable {
    pub(crate) fn from_sorted(atoms: Vec<Atom>) -> Self {
        let index = atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), AtomId(i as u32)))
            .collect();
        AtomTable { atoms, index }
    }

    pub fn get(&self, atom: &Atom) -> Option<AtomId> {
        self.index.get(atom).copied()
    }

    pub fn atom(&self, id: AtomId) -> &Atom {
        &self.atoms[id.index()]
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (AtomId, &Atom)> {
        self.atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (AtomId(i as u32), a))
    }
}

/// One outcome of a choice variable; `atom` is `None` for the residual "nothing" outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub atom: Option<AtomId>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceVariable {
    pub id: usize,
    pub outcomes: Vec<Outcome>,
    /// Source statement index.
    pub origin: usize,
    pub param: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionVariable {
    pub id: usize,
    /// The atom made true when the decision is taken.
    pub atom: AtomId,
    /// The atom users name the decision by (a group alternative or a guarded decision head).
    pub label: AtomId,
    pub group: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionGroup {
    pub id: usize,
    /// Decision ids, in alternative order.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundLiteral {
    pub atom: AtomId,
    pub negated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroundRule {
    pub stratum: usize,
    pub head: AtomId,
    pub body: Vec<GroundLiteral>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundUtility {
    pub atom: AtomId,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundConstraint {
    pub body: Vec<GroundLiteral>,
    pub origin: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parameter {
    pub id: usize,
    pub value: Option<f64>,
    pub origin: usize,
    pub clause: String,
}

/// A variable-free program ready for inference.
#[derive(Debug, Clone, Default)]
pub struct GroundProgram {
    pub atoms: AtomTable,
    /// Atoms that hold in every world under every strategy.
    pub facts: Vec<AtomId>,
    pub choices: Vec<ChoiceVariable>,
    /// Group members first (group order, alternative order), then free decisions by label.
    pub decisions: Vec<DecisionVariable>,
    pub groups: Vec<DecisionGroup>,
    /// Sorted by stratum, then head.
    pub rules: Vec<GroundRule>,
    pub strata: usize,
    /// Sorted by atom, one entry per atom.
    pub utilities: Vec<GroundUtility>,
    pub constraints: Vec<GroundConstraint>,
    pub evidence: Vec<(AtomId, bool)>,
    pub params: Vec<Parameter>,
    /// Utility, evidence or constraint atoms that no rule, choice or decision can make true.
    pub unreachable: Vec<AtomId>,
    pub warnings: Vec<String>,
    pub universe: BTreeSet<Term>,
}

impl GroundProgram {
    pub fn name(&self, id: AtomId) -> String {
        self.atoms.atom(id).to_string()
    }

    pub fn lookup(&self, atom: &Atom) -> Option<AtomId> {
        self.atoms.get(atom)
    }

    pub fn free_decisions(&self) -> impl Iterator<Item = &DecisionVariable> {
        self.decisions.iter().filter(|d| d.group.is_none())
    }

    pub fn free_count(&self) -> usize {
        self.free_decisions().count()
    }

    /// Number of possible worlds, as a float so that huge spaces do not overflow.
    pub fn world_count(&self) -> f64 {
        self.choices
            .iter()
            .map(|c| c.outcomes.len() as f64)
            .product()
    }

    pub fn literal_text(&self, lit: &GroundLiteral) -> String {
        if lit.negated {
            format!("\\+{}", self.name(lit.atom))
        } else {
            self.name(lit.atom)
        }
    }

    pub fn constraint_text(&self, index: usize) -> String {
        let body: Vec<String> = self.constraints[index]
            .body
            .iter()
            .map(|l| self.literal_text(l))
            .collect();
        format!(":- {}.", body.join(", "))
    }

    /// Fails if some learnable parameter has neither an initial nor a fitted value.
    pub fn require_parameters(&self) -> Result<()> {
        match self.params.iter().find(|p| p.value.is_none()) {
            Some(p) => Err(Error::UnsetParameter {
                clause: p.clause.clone(),
            }),
            None => Ok(()),
        }
    }

    /// A copy with the learnable parameters set to `values` (indexed by parameter id).
    pub fn with_params(&self, values: &[f64]) -> GroundProgram {
        let mut out = self.clone();
        for p in &mut out.params {
            p.value = Some(values[p.id]);
        }
        for c in &mut out.choices {
            if let Some(id) = c.param {
                c.outcomes[0].probability = values[id];
                c.outcomes[1].probability = 1.0 - values[id];
            }
        }
        out
    }

    /// Atoms the given roots depend on through rule bodies, roots included.
    pub fn dependency_cone(&self, roots: impl IntoIterator<Item = AtomId>) -> Vec<bool> {
        let mut by_head: HashMap<AtomId, Vec<usize>> = HashMap::new();
        for (i, r) in self.rules.iter().enumerate() {
            by_head.entry(r.head).or_default().push(i);
        }
        let mut seen = vec![false; self.atoms.len()];
        let mut stack: Vec<AtomId> = roots.into_iter().collect();
        while let Some(a) = stack.pop() {
            if std::mem::replace(&mut seen[a.index()], true) {
                continue;
            }
            for &r in by_head.get(&a).into_iter().flatten() {
                stack.extend(self.rules[r].body.iter().map(|l| l.atom));
            }
        }
        seen
    }

    /// Choice variables with an outcome inside the given atom set.
    pub fn choices_within(&self, cone: &[bool]) -> Vec<usize> {
        self.choices
            .iter()
            .filter(|c| {
                c.outcomes
                    .iter()
                    .any(|o| o.atom.is_some_and(|a| cone[a.index()]))
            })
            .map(|c| c.id)
            .collect()
    }

    /// Drops rules and choice variables that no utility, evidence or constraint atom depends on.
    /// Decisions are kept so strategies stay interchangeable with the unpruned program.
    pub fn pruned(&self) -> GroundProgram {
        let roots = self
            .utilities
            .iter()
            .map(|u| u.atom)
            .chain(self.evidence.iter().map(|e| e.0))
            .chain(
                self.constraints
                    .iter()
                    .flat_map(|c| c.body.iter().map(|l| l.atom)),
            )
            .chain(self.decisions.iter().map(|d| d.label));
        let cone = self.dependency_cone(roots);
        let mut out = self.clone();
        out.rules.retain(|r| cone[r.head.index()]);
        let keep = self.choices_within(&cone);
        out.choices = keep
            .iter()
            .enumerate()
            .map(|(new_id, &old)| ChoiceVariable {
                id: new_id,
                ..self.choices[old].clone()
            })
            .collect();
        out
    }

    /// Debug listing, one ground clause per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for &f in &self.facts {
            let _ = writeln!(out, "{}.", self.name(f));
        }
        for c in &self.choices {
            let heads: Vec<String> = c
                .outcomes
                .iter()
                .map(|o| {
                    let name = o.atom.map_or("none".to_owned(), |a| self.name(a));
                    format!("{}::{name}", Number(o.probability))
                })
                .collect();
            let _ = writeln!(out, "{}.", heads.join("; "));
        }
        for g in &self.groups {
            let alts: Vec<String> = g
                .members
                .iter()
                .map(|&d| format!("?::{}", self.name(self.decisions[d].atom)))
                .collect();
            let _ = writeln!(out, "{}.", alts.join(";"));
        }
        for d in self.free_decisions() {
            let _ = writeln!(out, "?::{}.", self.name(d.atom));
        }
        for r in &self.rules {
            let body: Vec<String> = r.body.iter().map(|l| self.literal_text(l)).collect();
            if body.is_empty() {
                let _ = writeln!(out, "{}.", self.name(r.head));
            } else {
                let _ = writeln!(out, "{} :- {}.", self.name(r.head), body.join(", "));
            }
        }
        for u in &self.utilities {
            let _ = writeln!(out, "utility({}, {}).", self.name(u.atom), Number(u.reward));
        }
        for i in 0..self.constraints.len() {
            let _ = writeln!(out, "{}", self.constraint_text(i));
        }
        for (a, truth) in &self.evidence {
            let _ = writeln!(out, "evidence({}, {truth}).", self.name(*a));
        }
        out
    }
}

/// Checks that the ground rules admit a stratification and returns the stratum of every
/// derived predicate.
pub fn check_stratified(gp: &GroundProgram) -> Result<BTreeMap<String, usize>> {
    let mut preds = BTreeSet::new();
    let mut deps = BTreeSet::new();
    for r in &gp.rules {
        let head = gp.atoms.atom(r.head).predicate.clone();
        for l in &r.body {
            deps.insert(Dependency {
                head: head.clone(),
                body: gp.atoms.atom(l.atom).predicate.clone(),
                negative: l.negated,
            });
        }
        preds.insert(head);
    }
    let deps: Vec<Dependency> = deps.into_iter().collect();
    let strata = stratify(&preds, &deps)?;
    Ok(strata
        .into_iter()
        .filter(|(p, _)| preds.contains(p))
        .collect())
}
