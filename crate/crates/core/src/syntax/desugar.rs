use std::collections::{BTreeSet, HashSet};
use std::fmt;

use super::ast::*;
use crate::error::{Error, Result};

/// Probability of one head of a core probabilistic fact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prob {
    Fixed(f64),
    Param(usize),
}

/// A learnable clause-level parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamDecl {
    pub id: usize,
    pub init: Option<f64>,
    /// Index of the source statement carrying the `t(...)` marker.
    pub origin: usize,
    /// The source clause, for reports.
    pub clause: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoreClause {
    /// A choice between the head atoms. `lazy` facts were introduced for probabilistic rules:
    /// their variables are bound by the rule that uses them, and every ground instance is an
    /// independent choice.
    ProbFact {
        heads: Vec<(Prob, Atom)>,
        lazy: bool,
        origin: usize,
    },
    DecisionGroup {
        group: usize,
        alternatives: Vec<Atom>,
    },
    /// A free decision atom (`atom`) standing for the guarded decision head `label`.
    FreeDecision {
        atom: Atom,
        label: Atom,
        origin: usize,
    },
    Rule {
        head: Atom,
        body: Vec<Literal>,
        origin: usize,
    },
    Utility {
        target: Atom,
        reward: f64,
        guard: Vec<Literal>,
        origin: usize,
    },
    Constraint {
        body: Vec<Literal>,
        origin: usize,
    },
    Evidence {
        atom: Atom,
        truth: bool,
    },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoreProgram {
    pub clauses: Vec<CoreClause>,
    pub params: Vec<ParamDecl>,
}

struct Fresh {
    taken: HashSet<String>,
    counters: std::collections::HashMap<String, usize>,
}

impl Fresh {
    fn aux(&mut self, base: &str) -> String {
        loop {
            let n = self.counters.entry(base.to_owned()).or_insert(0);
            *n += 1;
            let name = format!("{base}_aux{n}");
            if self.taken.insert(name.clone()) {
                return name;
            }
        }
    }

    fn decision(&mut self, base: &str) -> String {
        let mut name = format!("d_{base}");
        let mut n = 1;
        while self.taken.contains(&name) {
            n += 1;
            name = format!("d_{base}_{n}");
        }
        self.taken.insert(name.clone());
        name
    }
}

/// Expands body disjunctions into alternative conjunctions.
pub fn expand_body(body: &[BodyItem]) -> Vec<Vec<Literal>> {
    let mut out: Vec<Vec<Literal>> = vec![Vec::new()];
    for item in body {
        match item {
            BodyItem::Literal(lit) => {
                for conj in &mut out {
                    conj.push(lit.clone());
                }
            }
            BodyItem::Disjunction(branches) => {
                let mut next = Vec::new();
                for prefix in &out {
                    for branch in branches {
                        for tail in expand_body(branch) {
                            let mut conj = prefix.clone();
                            conj.extend(tail);
                            next.push(conj);
                        }
                    }
                }
                out = next;
            }
        }
    }
    out
}

fn predicates(program: &Program) -> HashSet<String> {
    fn body_preds(body: &[BodyItem], out: &mut HashSet<String>) {
        for conj in expand_body(body) {
            for lit in conj {
                out.insert(lit.atom.predicate);
            }
        }
    }
    let mut out = HashSet::new();
    for statement in &program.statements {
        match statement {
            Statement::AnnotatedDisjunction { heads, body } => {
                out.extend(heads.iter().map(|(_, h)| h.predicate.clone()));
                body_preds(body, &mut out);
            }
            Statement::DecisionGroup { alternatives } => {
                out.extend(alternatives.iter().map(|a| a.predicate.clone()));
            }
            Statement::DecisionRule { head, body } | Statement::Rule { head, body } => {
                out.insert(head.predicate.clone());
                body_preds(body, &mut out);
            }
            Statement::Utility { target, guard, .. } => {
                out.insert(target.predicate.clone());
                body_preds(guard, &mut out);
            }
            Statement::Constraint { body } => body_preds(body, &mut out),
            Statement::Evidence { atom, .. } => {
                out.insert(atom.predicate.clone());
            }
        }
    }
    out
}

/// Normalizes a parsed program: body disjunctions are split into separate clauses,
/// probabilistic rules get one auxiliary probabilistic fact each, and guarded decisions
/// become a free decision atom plus a deterministic rule.
pub fn desugar(program: &Program) -> Result<CoreProgram> {
    let mut fresh = Fresh {
        taken: predicates(program),
        counters: Default::default(),
    };
    let mut core = CoreProgram::default();
    let mut groups = 0;

    for (origin, statement) in program.statements.iter().enumerate() {
        match statement {
            Statement::AnnotatedDisjunction { heads, body } => {
                let learnable = heads
                    .iter()
                    .any(|(p, _)| matches!(p, ProbExpr::Learnable(_)));
                if learnable && heads.len() > 1 {
                    return Err(Error::Unsupported(format!(
                        "learnable parameters need a single-head clause: `{statement}`"
                    )));
                }
                let probs: Vec<Prob> = heads
                    .iter()
                    .map(|(p, _)| match p {
                        ProbExpr::Fixed(v) => Prob::Fixed(*v),
                        ProbExpr::Learnable(init) => {
                            let id = core.params.len();
                            core.params.push(ParamDecl {
                                id,
                                init: *init,
                                origin,
                                clause: statement.to_string(),
                            });
                            Prob::Param(id)
                        }
                    })
                    .collect();

                if body.is_empty() {
                    core.clauses.push(CoreClause::ProbFact {
                        heads: probs
                            .into_iter()
                            .zip(heads.iter().map(|(_, h)| h.clone()))
                            .collect(),
                        lazy: false,
                        origin,
                    });
                    continue;
                }

                let mut vars = Vec::new();
                for (_, h) in heads {
                    h.collect_variables(&mut vars);
                }
                for conj in expand_body(body) {
                    for lit in conj {
                        lit.atom.collect_variables(&mut vars);
                    }
                }
                let var_terms: Vec<Term> = vars.into_iter().map(Term::Variable).collect();
                let aux: Vec<Atom> = heads
                    .iter()
                    .map(|(_, h)| Atom::new(fresh.aux(&h.predicate), var_terms.clone()))
                    .collect();
                core.clauses.push(CoreClause::ProbFact {
                    heads: probs.into_iter().zip(aux.iter().cloned()).collect(),
                    lazy: true,
                    origin,
                });
                for conj in expand_body(body) {
                    for ((_, head), aux) in heads.iter().zip(&aux) {
                        let mut rule_body = vec![Literal::positive(aux.clone())];
                        rule_body.extend(conj.iter().cloned());
                        core.clauses.push(CoreClause::Rule {
                            head: head.clone(),
                            body: rule_body,
                            origin,
                        });
                    }
                }
            }
            Statement::DecisionGroup { alternatives } => {
                core.clauses.push(CoreClause::DecisionGroup {
                    group: groups,
                    alternatives: alternatives.clone(),
                });
                groups += 1;
            }
            Statement::DecisionRule { head, body } => {
                let existing = core.clauses.iter().find_map(|c| match c {
                    CoreClause::FreeDecision { atom, label, .. }
                        if label.predicate == head.predicate =>
                    {
                        Some(atom.predicate.clone())
                    }
                    _ => None,
                });
                let name = existing.unwrap_or_else(|| fresh.decision(&head.predicate));
                let atom = Atom::new(name, head.args.clone());
                core.clauses.push(CoreClause::FreeDecision {
                    atom: atom.clone(),
                    label: head.clone(),
                    origin,
                });
                for conj in expand_body(body) {
                    let mut rule_body = vec![Literal::positive(atom.clone())];
                    rule_body.extend(conj);
                    core.clauses.push(CoreClause::Rule {
                        head: head.clone(),
                        body: rule_body,
                        origin,
                    });
                }
            }
            Statement::Rule { head, body } => {
                for conj in expand_body(body) {
                    core.clauses.push(CoreClause::Rule {
                        head: head.clone(),
                        body: conj,
                        origin,
                    });
                }
            }
            Statement::Utility {
                target,
                reward,
                guard,
            } => {
                for conj in expand_body(guard) {
                    core.clauses.push(CoreClause::Utility {
                        target: target.clone(),
                        reward: *reward,
                        guard: conj,
                        origin,
                    });
                }
            }
            Statement::Constraint { body } => {
                for conj in expand_body(body) {
                    core.clauses
                        .push(CoreClause::Constraint { body: conj, origin });
                }
            }
            Statement::Evidence { atom, truth } => core.clauses.push(CoreClause::Evidence {
                atom: atom.clone(),
                truth: *truth,
            }),
        }
    }
    Ok(core)
}

/// Every constant (including list members and numbers) in the program, plus `extra`.
pub fn herbrand_universe(core: &CoreProgram, extra: &BTreeSet<Term>) -> BTreeSet<Term> {
    let mut out = extra.clone();
    let mut add_atom = |atom: &Atom| {
        for arg in &atom.args {
            arg.collect_constants(&mut out);
        }
    };
    for clause in &core.clauses {
        match clause {
            CoreClause::ProbFact { heads, .. } => heads.iter().for_each(|(_, h)| add_atom(h)),
            CoreClause::DecisionGroup { alternatives, .. } => {
                alternatives.iter().for_each(&mut add_atom)
            }
            CoreClause::FreeDecision { label, .. } => add_atom(label),
            CoreClause::Rule { head, body, .. } => {
                add_atom(head);
                body.iter().for_each(|l| add_atom(&l.atom));
            }
            CoreClause::Utility { target, guard, .. } => {
                add_atom(target);
                guard.iter().for_each(|l| add_atom(&l.atom));
            }
            CoreClause::Constraint { body, .. } => body.iter().for_each(|l| add_atom(&l.atom)),
            CoreClause::Evidence { atom, .. } => add_atom(atom),
        }
    }
    out
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

impl fmt::Display for CoreClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = |b: &[Literal]| {
            if b.is_empty() {
                String::new()
            } else {
                format!(" :- {}", join(b))
            }
        };
        match self {
            CoreClause::ProbFact { heads, .. } => {
                let hs: Vec<String> = heads
                    .iter()
                    .map(|(p, h)| match p {
                        Prob::Fixed(v) => format!("{}::{h}", Number(*v)),
                        Prob::Param(id) => format!("t(p{id})::{h}"),
                    })
                    .collect();
                write!(f, "{}.", hs.join("; "))
            }
            CoreClause::DecisionGroup { alternatives, .. } => {
                let alts: Vec<String> = alternatives.iter().map(|a| format!("?::{a}")).collect();
                write!(f, "{}.", alts.join(";"))
            }
            CoreClause::FreeDecision { atom, .. } => write!(f, "?::{atom}."),
            CoreClause::Rule { head, body: b, .. } => write!(f, "{head}{}.", body(b)),
            CoreClause::Utility {
                target,
                reward,
                guard,
                ..
            } => write!(f, "utility({target}, {}){}.", Number(*reward), body(guard)),
            CoreClause::Constraint { body: b, .. } => write!(f, ":- {}.", join(b)),
            CoreClause::Evidence { atom, truth } => write!(f, "evidence({atom}, {truth})."),
        }
    }
}

impl fmt::Display for CoreProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for clause in &self.clauses {
            writeln!(f, "{clause}")?;
        }
        Ok(())
    }
}
