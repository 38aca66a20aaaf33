use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::bind::{builtin_ready, eval_builtin, match_atom, substitute_atom, Bindings};
use super::program::*;
use super::stratify::{stratify, Dependency};
use crate::error::{Error, Result};
use crate::syntax::{herbrand_universe, Atom, CoreClause, CoreProgram, Literal, Prob, Term};

/// Residual probability below which a choice gets no "nothing" outcome.
const RESIDUAL_EPSILON: f64 = 1e-12;

#[derive(Default)]
struct AtomSet {
    by_pred: HashMap<String, Vec<Atom>>,
    all: HashSet<Atom>,
}

impl AtomSet {
    fn insert(&mut self, atom: Atom) -> bool {
        if self.all.contains(&atom) {
            return false;
        }
        self.by_pred
            .entry(atom.predicate.clone())
            .or_default()
            .push(atom.clone());
        self.all.insert(atom);
        true
    }

    fn contains(&self, atom: &Atom) -> bool {
        self.all.contains(atom)
    }

    fn of(&self, predicate: &str) -> &[Atom] {
        self.by_pred.get(predicate).map_or(&[], Vec::as_slice)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Builtin,
    /// Fully known after static evaluation.
    Static,
    /// Truth depends on choices or decisions.
    Dynamic,
    /// Auxiliary choice or guarded decision atom, instantiated when first used.
    Lazy,
}

struct Classes {
    dynamic: HashSet<String>,
    prob_dependent: HashSet<String>,
    /// Auxiliary predicate to the index of its probabilistic fact.
    lazy_choice: HashMap<String, usize>,
    /// Guarded decision predicate to the label predicate.
    lazy_decision: HashMap<String, String>,
    strata: BTreeMap<String, usize>,
}

impl Classes {
    fn kind(&self, lit: &Literal) -> Kind {
        let p = &lit.atom.predicate;
        if lit.atom.is_builtin() {
            Kind::Builtin
        } else if self.lazy_choice.contains_key(p) || self.lazy_decision.contains_key(p) {
            Kind::Lazy
        } else if self.dynamic.contains(p) {
            Kind::Dynamic
        } else {
            Kind::Static
        }
    }
}

fn closure(seeds: HashSet<String>, edges: &[(String, String)]) -> HashSet<String> {
    let mut out = seeds;
    loop {
        let before = out.len();
        for (head, body) in edges {
            if out.contains(body) {
                out.insert(head.clone());
            }
        }
        if out.len() == before {
            return out;
        }
    }
}

fn classify(core: &CoreProgram) -> Result<Classes> {
    let mut choice = HashSet::new();
    let mut decision = HashSet::new();
    let mut lazy_choice = HashMap::new();
    let mut lazy_decision = HashMap::new();
    let mut heads = BTreeSet::new();
    let mut deps = BTreeSet::new();
    for (i, clause) in core.clauses.iter().enumerate() {
        match clause {
            CoreClause::ProbFact {
                heads: hs, lazy, ..
            } => {
                for (_, h) in hs {
                    choice.insert(h.predicate.clone());
                    if *lazy {
                        lazy_choice.insert(h.predicate.clone(), i);
                    }
                }
            }
            CoreClause::DecisionGroup { alternatives, .. } => {
                decision.extend(alternatives.iter().map(|a| a.predicate.clone()));
            }
            CoreClause::FreeDecision { atom, label, .. } => {
                decision.insert(atom.predicate.clone());
                lazy_decision.insert(atom.predicate.clone(), label.predicate.clone());
            }
            CoreClause::Rule { head, body, .. } => {
                heads.insert(head.predicate.clone());
                for lit in body.iter().filter(|l| !l.atom.is_builtin()) {
                    deps.insert(Dependency {
                        head: head.predicate.clone(),
                        body: lit.atom.predicate.clone(),
                        negative: lit.negated,
                    });
                }
            }
            _ => {}
        }
    }
    let deps: Vec<Dependency> = deps.into_iter().collect();
    let strata = stratify(&heads, &deps)?;
    let edges: Vec<(String, String)> = deps
        .iter()
        .map(|d| (d.head.clone(), d.body.clone()))
        .collect();
    let prob_dependent = closure(choice.clone(), &edges);
    let dynamic = closure(choice.union(&decision).cloned().collect(), &edges);
    Ok(Classes {
        dynamic,
        prob_dependent,
        lazy_choice,
        lazy_decision,
        strata,
    })
}

/// Body evaluation over the static atoms and the currently possible dynamic atoms.
struct Joiner<'a> {
    classes: &'a Classes,
    statics: &'a AtomSet,
    possible: &'a AtomSet,
    clause: &'a str,
}

impl Joiner<'_> {
    fn solutions(&self, body: &[Literal], start: Bindings) -> Result<Vec<Bindings>> {
        let remaining: Vec<usize> = (0..body.len()).collect();
        let mut out = Vec::new();
        self.step(body, &remaining, start, &mut out)?;
        Ok(out)
    }

    fn step(
        &self,
        body: &[Literal],
        remaining: &[usize],
        b: Bindings,
        out: &mut Vec<Bindings>,
    ) -> Result<()> {
        if remaining.is_empty() {
            out.push(b);
            return Ok(());
        }
        let pick = self.select(body, remaining, &b)?;
        let rest: Vec<usize> = remaining.iter().copied().filter(|&i| i != pick).collect();
        let lit = &body[pick];
        let kind = self.classes.kind(lit);
        match kind {
            Kind::Builtin => {
                for ext in eval_builtin(lit, &b, self.clause)? {
                    self.step(body, &rest, ext, out)?;
                }
            }
            Kind::Lazy => self.step(body, &rest, b, out)?,
            Kind::Static | Kind::Dynamic => {
                let set = if kind == Kind::Static {
                    self.statics
                } else {
                    self.possible
                };
                let g = substitute_atom(&lit.atom, &b);
                if lit.negated {
                    if kind == Kind::Dynamic {
                        if !g.is_ground() {
                            return Err(Error::Unsupported(format!(
                                "anonymous variable under negation of a probabilistic atom in `{}`",
                                self.clause
                            )));
                        }
                        return self.step(body, &rest, b, out);
                    }
                    let holds = if g.is_ground() {
                        set.contains(&g)
                    } else {
                        set.of(&g.predicate)
                            .iter()
                            .any(|c| match_atom(&g, c, &mut b.clone()))
                    };
                    if !holds {
                        self.step(body, &rest, b, out)?;
                    }
                } else if g.is_ground() {
                    if set.contains(&g) {
                        self.step(body, &rest, b, out)?;
                    }
                } else {
                    for candidate in set.of(&g.predicate) {
                        let mut ext = b.clone();
                        if match_atom(&lit.atom, candidate, &mut ext) {
                            self.step(body, &rest, ext, out)?;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Picks the next literal: bound filters first, then `member` generators, then the
    /// positive literal with the most bound arguments, then auxiliary atoms.
    fn select(&self, body: &[Literal], remaining: &[usize], b: &Bindings) -> Result<usize> {
        let bound = |lit: &Literal| lit.atom.variables().iter().all(|v| b.is_bound(v));
        let kinds: Vec<Kind> = remaining
            .iter()
            .map(|&i| self.classes.kind(&body[i]))
            .collect();

        for (&i, &kind) in remaining.iter().zip(&kinds) {
            if kind != Kind::Lazy && bound(&body[i]) {
                return Ok(i);
            }
        }
        for (&i, &kind) in remaining.iter().zip(&kinds) {
            let lit = &body[i];
            if kind == Kind::Builtin && !lit.negated && builtin_ready(&lit.atom, b) {
                return Ok(i);
            }
        }
        let mut best: Option<(usize, usize)> = None;
        for (&i, &kind) in remaining.iter().zip(&kinds) {
            let lit = &body[i];
            if lit.negated || !matches!(kind, Kind::Static | Kind::Dynamic) {
                continue;
            }
            let score = lit
                .atom
                .args
                .iter()
                .filter(|t| {
                    let mut vs = Vec::new();
                    t.collect_variables(&mut vs);
                    vs.iter().all(|v| b.is_bound(v))
                })
                .count();
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((i, score));
            }
        }
        if let Some((i, _)) = best {
            return Ok(i);
        }
        for (&i, &kind) in remaining.iter().zip(&kinds) {
            if kind == Kind::Lazy && bound(&body[i]) {
                return Ok(i);
            }
        }

        let lit = &body[remaining[0]];
        if kinds[0] == Kind::Builtin {
            return Err(Error::Instantiation {
                builtin: lit.atom.signature(),
                clause: self.clause.to_owned(),
            });
        }
        let variable = remaining
            .iter()
            .flat_map(|&i| body[i].atom.variables())
            .find(|v| !b.is_bound(v))
            .unwrap_or_default();
        Err(Error::RangeRestriction {
            variable,
            clause: self.clause.to_owned(),
        })
    }
}

fn require_ground(atom: &Atom, clause: &str) -> Result<()> {
    match atom.variables().into_iter().next() {
        Some(variable) => Err(Error::RangeRestriction {
            variable,
            clause: clause.to_owned(),
        }),
        None if !atom.is_ground() => Err(Error::RangeRestriction {
            variable: "_".into(),
            clause: clause.to_owned(),
        }),
        None => Ok(()),
    }
}

struct ChoiceInstance {
    heads: Vec<(Prob, Atom)>,
    origin: usize,
}

struct FreeInstance {
    atom: Atom,
    label: Atom,
}

type RawLiteral = (Atom, bool);

struct Grounder<'a> {
    core: &'a CoreProgram,
    classes: Classes,
    statics: AtomSet,
    possible: AtomSet,
    /// Keyed by (clause index, argument tuple) for canonical order.
    choices: BTreeMap<(usize, Vec<Term>), ChoiceInstance>,
    free: BTreeMap<Atom, FreeInstance>,
    rules: BTreeSet<(Atom, Vec<RawLiteral>)>,
}

/// A static rule as `(predicate, head, body)`.
type StaticRule<'c> = (String, &'c Atom, &'c [Literal]);

impl Grounder<'_> {
    fn evaluate_statics(&mut self) -> Result<()> {
        let mut by_stratum: BTreeMap<usize, Vec<StaticRule<'_>>> = BTreeMap::new();
        for clause in &self.core.clauses {
            if let CoreClause::Rule { head, body, .. } = clause {
                if !self.classes.dynamic.contains(&head.predicate) {
                    by_stratum
                        .entry(self.classes.strata[&head.predicate])
                        .or_default()
                        .push((clause.to_string(), head, body));
                }
            }
        }
        let empty = AtomSet::default();
        for rules in by_stratum.values() {
            loop {
                let mut derived = Vec::new();
                for (text, head, body) in rules {
                    let joiner = Joiner {
                        classes: &self.classes,
                        statics: &self.statics,
                        possible: &empty,
                        clause: text,
                    };
                    for b in joiner.solutions(body, Bindings::new())? {
                        let h = substitute_atom(head, &b);
                        require_ground(&h, text)?;
                        derived.push(h);
                    }
                }
                let mut changed = false;
                for h in derived {
                    changed |= self.statics.insert(h);
                }
                if !changed {
                    break;
                }
            }
        }
        Ok(())
    }

    fn seed_eager(&mut self) -> Result<()> {
        for (i, clause) in self.core.clauses.iter().enumerate() {
            match clause {
                CoreClause::ProbFact {
                    heads,
                    lazy: false,
                    origin,
                } => {
                    for (_, h) in heads {
                        require_ground(h, &clause.to_string())?;
                        self.possible.insert(h.clone());
                    }
                    self.choices.insert(
                        (i, Vec::new()),
                        ChoiceInstance {
                            heads: heads.clone(),
                            origin: *origin,
                        },
                    );
                }
                CoreClause::DecisionGroup { alternatives, .. } => {
                    for a in alternatives {
                        require_ground(a, &clause.to_string())?;
                        self.possible.insert(a.clone());
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Turns a solved body into its dynamic literals, creating auxiliary instances on the way.
    fn residual(
        &mut self,
        body: &[Literal],
        b: &Bindings,
        clause: &str,
    ) -> Result<Vec<RawLiteral>> {
        let mut out = Vec::new();
        for lit in body {
            match self.classes.kind(lit) {
                Kind::Builtin | Kind::Static => {}
                Kind::Dynamic => out.push((substitute_atom(&lit.atom, b), lit.negated)),
                Kind::Lazy => {
                    let g = substitute_atom(&lit.atom, b);
                    require_ground(&g, clause)?;
                    self.instantiate_lazy(&g);
                    out.push((g, lit.negated));
                }
            }
        }
        Ok(out)
    }

    fn instantiate_lazy(&mut self, g: &Atom) {
        if let Some(&index) = self.classes.lazy_choice.get(&g.predicate) {
            let key = (index, g.args.clone());
            if self.choices.contains_key(&key) {
                return;
            }
            let CoreClause::ProbFact { heads, origin, .. } = &self.core.clauses[index] else {
                unreachable!("auxiliary predicate without a probabilistic fact")
            };
            let heads: Vec<(Prob, Atom)> = heads
                .iter()
                .map(|(p, h)| (*p, Atom::new(h.predicate.clone(), g.args.clone())))
                .collect();
            for (_, h) in &heads {
                self.possible.insert(h.clone());
            }
            self.choices.insert(
                key,
                ChoiceInstance {
                    heads,
                    origin: *origin,
                },
            );
        } else if let Some(label) = self.classes.lazy_decision.get(&g.predicate) {
            let label = Atom::new(label.clone(), g.args.clone());
            self.possible.insert(g.clone());
            self.free.entry(label.clone()).or_insert(FreeInstance {
                atom: g.clone(),
                label,
            });
        }
    }

    fn ground_dynamic_rules(&mut self) -> Result<()> {
        let core = self.core;
        let rules: Vec<(String, &Atom, &[Literal])> = core
            .clauses
            .iter()
            .filter_map(|c| match c {
                CoreClause::Rule { head, body, .. }
                    if self.classes.dynamic.contains(&head.predicate) =>
                {
                    Some((c.to_string(), head, body.as_slice()))
                }
                _ => None,
            })
            .collect();
        loop {
            let mut changed = false;
            for (text, head, body) in &rules {
                let solutions = Joiner {
                    classes: &self.classes,
                    statics: &self.statics,
                    possible: &self.possible,
                    clause: text,
                }
                .solutions(body, Bindings::new())?;
                for b in solutions {
                    let h = substitute_atom(head, &b);
                    require_ground(&h, text)?;
                    let residual = self.residual(body, &b, text)?;
                    self.rules.insert((h.clone(), residual));
                    changed |= self.possible.insert(h);
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    fn check_body(&self, body: &[Literal], clause: &str, guard: bool) -> Result<()> {
        for lit in body {
            let kind = self.classes.kind(lit);
            let atom = lit.atom.to_string();
            if guard && matches!(kind, Kind::Dynamic | Kind::Lazy) {
                return Err(Error::DynamicGuard {
                    clause: clause.to_owned(),
                    atom,
                });
            }
            let probabilistic = kind == Kind::Lazy
                || (kind == Kind::Dynamic
                    && self.classes.prob_dependent.contains(&lit.atom.predicate));
            if !guard && probabilistic {
                return Err(Error::ProbabilisticConstraint {
                    clause: clause.to_owned(),
                    atom,
                });
            }
        }
        Ok(())
    }

    fn joiner<'b>(&'b self, clause: &'b str) -> Joiner<'b> {
        Joiner {
            classes: &self.classes,
            statics: &self.statics,
            possible: &self.possible,
            clause,
        }
    }
}

/// Grounds a desugared program over the Herbrand universe of its constants plus `extra`.
pub fn ground(core: &CoreProgram, extra: &BTreeSet<Term>) -> Result<GroundProgram> {
    let mut g = Grounder {
        core,
        classes: classify(core)?,
        statics: AtomSet::default(),
        possible: AtomSet::default(),
        choices: BTreeMap::new(),
        free: BTreeMap::new(),
        rules: BTreeSet::new(),
    };
    g.evaluate_statics()?;
    g.seed_eager()?;
    g.ground_dynamic_rules()?;

    let mut warnings = Vec::new();
    let mut utilities: BTreeMap<Atom, f64> = BTreeMap::new();
    let mut constraints: BTreeSet<(Vec<RawLiteral>, usize)> = BTreeSet::new();
    let mut evidence: BTreeMap<Atom, bool> = BTreeMap::new();
    for clause in &core.clauses {
        let text = clause.to_string();
        match clause {
            CoreClause::Utility {
                target,
                reward,
                guard,
                ..
            } => {
                g.check_body(guard, &text, true)?;
                for b in g.joiner(&text).solutions(guard, Bindings::new())? {
                    let t = substitute_atom(target, &b);
                    require_ground(&t, &text)?;
                    if let Some(previous) = utilities.get_mut(&t) {
                        warnings.push(format!("utilities of {t} are summed"));
                        *previous += reward;
                    } else {
                        utilities.insert(t, *reward);
                    }
                }
            }
            CoreClause::Constraint { body, origin } => {
                g.check_body(body, &text, false)?;
                for b in g.joiner(&text).solutions(body, Bindings::new())? {
                    let mut residual = g.residual(body, &b, &text)?;
                    residual.sort();
                    residual.dedup();
                    constraints.insert((residual, *origin));
                }
            }
            CoreClause::Evidence { atom, truth } => {
                require_ground(atom, &text)?;
                if evidence
                    .insert(atom.clone(), *truth)
                    .is_some_and(|t| t != *truth)
                {
                    return Err(Error::InconsistentEvidence);
                }
            }
            _ => {}
        }
    }

    // Canonical atom table.
    let mut all: BTreeSet<Atom> = g.statics.all.iter().cloned().collect();
    all.extend(g.possible.all.iter().cloned());
    all.extend(utilities.keys().cloned());
    all.extend(evidence.keys().cloned());
    for (body, _) in &constraints {
        all.extend(body.iter().map(|(a, _)| a.clone()));
    }
    for r in &g.rules {
        all.extend(r.1.iter().map(|(a, _)| a.clone()));
    }
    let atoms = AtomTable::from_sorted(all.into_iter().collect());
    let id = |a: &Atom| atoms.get(a).expect("atom interned");
    let reachable = |a: &Atom| g.statics.contains(a) || g.possible.contains(a);

    let convert = |body: &[RawLiteral]| -> Vec<GroundLiteral> {
        let mut out: Vec<GroundLiteral> = body
            .iter()
            // a negated atom that can never hold is always satisfied
            .filter(|(a, negated)| !negated || reachable(a))
            .map(|(a, negated)| GroundLiteral {
                atom: id(a),
                negated: *negated,
            })
            .collect();
        out.sort();
        out.dedup();
        out
    };

    let mut rules: BTreeSet<GroundRule> = g
        .rules
        .iter()
        .map(|(head, body)| GroundRule {
            stratum: g.classes.strata[&head.predicate],
            head: id(head),
            body: convert(body),
        })
        .collect();
    let levels: BTreeSet<usize> = rules.iter().map(|r| r.stratum).collect();
    let dense: BTreeMap<usize, usize> = levels.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    rules = rules
        .into_iter()
        .map(|r| GroundRule {
            stratum: dense[&r.stratum],
            ..r
        })
        .collect();

    let params: Vec<Parameter> = core
        .params
        .iter()
        .map(|p| Parameter {
            id: p.id,
            value: p.init,
            origin: p.origin,
            clause: p.clause.clone(),
        })
        .collect();

    let choices: Vec<ChoiceVariable> = g
        .choices
        .values()
        .enumerate()
        .map(|(i, inst)| {
            let mut param = None;
            let mut outcomes: Vec<Outcome> = inst
                .heads
                .iter()
                .map(|(p, h)| {
                    let probability = match *p {
                        Prob::Fixed(v) => v,
                        Prob::Param(pid) => {
                            param = Some(pid);
                            params[pid].value.unwrap_or(0.5)
                        }
                    };
                    Outcome {
                        atom: Some(id(h)),
                        probability,
                    }
                })
                .collect();
            let residual = 1.0 - outcomes.iter().map(|o| o.probability).sum::<f64>();
            if param.is_some() || residual > RESIDUAL_EPSILON {
                outcomes.push(Outcome {
                    atom: None,
                    probability: residual.max(0.0),
                });
            }
            ChoiceVariable {
                id: i,
                outcomes,
                origin: inst.origin,
                param,
            }
        })
        .collect();

    let mut decisions = Vec::new();
    let mut groups = Vec::new();
    let mut seen = HashSet::new();
    for clause in &core.clauses {
        if let CoreClause::DecisionGroup { alternatives, .. } = clause {
            let gid = groups.len();
            let mut members = Vec::new();
            for a in alternatives {
                if !seen.insert(a.clone()) {
                    return Err(Error::Unsupported(format!(
                        "decision {a} appears more than once"
                    )));
                }
                members.push(decisions.len());
                decisions.push(DecisionVariable {
                    id: decisions.len(),
                    atom: id(a),
                    label: id(a),
                    group: Some(gid),
                });
            }
            groups.push(DecisionGroup { id: gid, members });
        }
    }
    for inst in g.free.values() {
        decisions.push(DecisionVariable {
            id: decisions.len(),
            atom: id(&inst.atom),
            label: id(&inst.label),
            group: None,
        });
    }

    let ground_utilities: Vec<GroundUtility> = utilities
        .iter()
        .map(|(a, &reward)| GroundUtility {
            atom: id(a),
            reward,
        })
        .collect();
    let ground_constraints: Vec<GroundConstraint> = constraints
        .iter()
        .map(|(body, origin)| GroundConstraint {
            body: convert(body),
            origin: *origin,
        })
        .collect();
    let ground_evidence: Vec<(AtomId, bool)> = evidence.iter().map(|(a, &t)| (id(a), t)).collect();

    let mut unreachable = BTreeSet::new();
    for a in utilities.keys().chain(evidence.keys()) {
        if !reachable(a) {
            unreachable.insert(id(a));
        }
    }
    for (body, _) in &constraints {
        for (a, negated) in body {
            if !negated && !reachable(a) {
                unreachable.insert(id(a));
            }
        }
    }
    for &a in &unreachable {
        warnings.push(format!("{} can never be true", atoms.atom(a)));
    }

    let mut facts: Vec<AtomId> = g.statics.all.iter().map(id).collect();
    facts.sort();

    Ok(GroundProgram {
        strata: dense.len(),
        facts,
        choices,
        decisions,
        groups,
        rules: rules.into_iter().collect(),
        utilities: ground_utilities,
        constraints: ground_constraints,
        evidence: ground_evidence,
        params,
        unreachable: unreachable.into_iter().collect(),
        warnings,
        universe: herbrand_universe(core, extra),
        atoms,
    })
}
