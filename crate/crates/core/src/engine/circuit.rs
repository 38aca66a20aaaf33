//! Compilation of every atom into a reduced ordered BDD over decision and choice variables,
//! and weighted model counting on the result.

use std::cell::RefCell;

use super::bdd::{Bdd, NodeId, DEFAULT_NODE_CAP, FALSE, TRUE};
use super::oracle::Oracle;
use super::{Engine, Evidence, Strategy, World};
use crate::error::{Error, Result};
use crate::ground::{AtomId, GroundProgram};

/// Largest variable count accepted by [`CircuitEngine::compile_by_expansion`].
pub const EXPANSION_LIMIT: usize = 22;

/// Exact inference on compiled decision diagrams.
///
/// Variable order: decision `d` is variable `d`; after the decisions, every choice with `k`
/// outcomes contributes `k - 1` binary variables in choice order. Binary `j` of a choice is
/// true when outcome `j` is selected given that no earlier outcome was.
pub struct CircuitEngine<'a> {
    gp: &'a GroundProgram,
    bdd: RefCell<Bdd>,
    atoms: Vec<NodeId>,
    choice_vars: Vec<Vec<u32>>,
    /// Probability of each binary variable, indexed by `var - decisions`.
    weights: Vec<f64>,
    /// Choice-only weighted count per node, filled on demand.
    counts: RefCell<Vec<f64>>,
    evidence: NodeId,
    utility_roots: Vec<NodeId>,
    constraint_roots: Vec<NodeId>,
}

fn binary_weights(probabilities: &[f64]) -> Vec<f64> {
    let mut rest = 1.0;
    let mut out = Vec::new();
    for &p in &probabilities[..probabilities.len().saturating_sub(1)] {
        out.push(if rest > 0.0 {
            (p / rest).clamp(0.0, 1.0)
        } else {
            0.0
        });
        rest -= p;
    }
    out
}

impl<'a> CircuitEngine<'a> {
    pub fn new(gp: &'a GroundProgram) -> Result<CircuitEngine<'a>> {
        CircuitEngine::with_node_cap(gp, DEFAULT_NODE_CAP)
    }

    pub fn with_node_cap(gp: &'a GroundProgram, cap: usize) -> Result<CircuitEngine<'a>> {
        let mut bdd = Bdd::new(cap);
        let decisions = gp.decisions.len() as u32;
        let mut next = decisions;
        let mut choice_vars = Vec::new();
        let mut weights = Vec::new();
        for c in &gp.choices {
            let probs: Vec<f64> = c.outcomes.iter().map(|o| o.probability).collect();
            let w = binary_weights(&probs);
            choice_vars.push((next..next + w.len() as u32).collect::<Vec<u32>>());
            next += w.len() as u32;
            weights.extend(w);
        }

        let mut f = vec![FALSE; gp.atoms.len()];
        for &a in &gp.facts {
            f[a.index()] = TRUE;
        }
        for (c, vars) in gp.choices.iter().zip(&choice_vars) {
            let mut none_before = TRUE;
            for (j, o) in c.outcomes.iter().enumerate() {
                let indicator = match vars.get(j) {
                    Some(&v) => {
                        let b = bdd.var(v)?;
                        let nb = bdd.not(b)?;
                        let ind = bdd.and(none_before, b)?;
                        none_before = bdd.and(none_before, nb)?;
                        ind
                    }
                    None => none_before,
                };
                if let Some(a) = o.atom {
                    f[a.index()] = bdd.or(f[a.index()], indicator)?;
                }
            }
        }
        for d in &gp.decisions {
            let v = bdd.var(d.id as u32)?;
            f[d.atom.index()] = bdd.or(f[d.atom.index()], v)?;
        }

        let mut strata = vec![Vec::new(); gp.strata];
        for r in &gp.rules {
            strata[r.stratum].push(r);
        }
        for rules in &strata {
            loop {
                let mut changed = false;
                for r in rules {
                    let mut body = TRUE;
                    for l in &r.body {
                        let lit = if l.negated {
                            bdd.not(f[l.atom.index()])?
                        } else {
                            f[l.atom.index()]
                        };
                        body = bdd.and(body, lit)?;
                        if body == FALSE {
                            break;
                        }
                    }
                    let updated = bdd.or(f[r.head.index()], body)?;
                    if updated != f[r.head.index()] {
                        f[r.head.index()] = updated;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
        }

        let mut engine = CircuitEngine {
            gp,
            bdd: RefCell::new(bdd),
            atoms: f,
            choice_vars,
            weights,
            counts: RefCell::new(Vec::new()),
            evidence: TRUE,
            utility_roots: Vec::new(),
            constraint_roots: Vec::new(),
        };
        engine.evidence = engine.conjunction(&gp.evidence)?;
        for u in &gp.utilities {
            let root = engine.conjunction(&[(u.atom, true)])?;
            let root = engine.bdd.get_mut().and(root, engine.evidence)?;
            engine.utility_roots.push(root);
        }
        for c in &gp.constraints {
            let lits: Vec<(AtomId, bool)> = c.body.iter().map(|l| (l.atom, !l.negated)).collect();
            let root = engine.conjunction(&lits)?;
            engine.constraint_roots.push(root);
        }
        Ok(engine)
    }

    pub fn bdd(&self) -> std::cell::Ref<'_, Bdd> {
        self.bdd.borrow()
    }

    pub fn decision_count(&self) -> u32 {
        self.gp.decisions.len() as u32
    }

    pub fn variable_count(&self) -> u32 {
        self.decision_count() + self.weights.len() as u32
    }

    /// The compiled function of an atom.
    pub fn compile(&self, atom: AtomId) -> NodeId {
        self.atoms[atom.index()]
    }

    /// Binary variables encoding a choice.
    pub fn choice_vars(&self, choice: usize) -> &[u32] {
        &self.choice_vars[choice]
    }

    pub fn weight(&self, var: u32) -> f64 {
        self.weights[(var - self.decision_count()) as usize]
    }

    /// Replaces the probabilities of learnable choices with `params` (indexed by parameter id).
    pub fn set_params(&mut self, params: &[f64]) {
        for (c, vars) in self.gp.choices.iter().zip(&self.choice_vars) {
            if let Some(p) = c.param {
                let i = (vars[0] - self.decision_count()) as usize;
                self.weights[i] = params[p];
            }
        }
        self.counts.get_mut().clear();
    }

    /// Conjunction of literals `(atom, truth)`.
    pub fn conjunction(&self, literals: &Evidence) -> Result<NodeId> {
        let mut bdd = self.bdd.borrow_mut();
        let mut acc = TRUE;
        for &(a, truth) in literals {
            let f = self.atoms[a.index()];
            let lit = if truth { f } else { bdd.not(f)? };
            acc = bdd.and(acc, lit)?;
        }
        Ok(acc)
    }

    /// Compiled bodies of the ground constraints.
    pub fn constraint_roots(&self) -> &[NodeId] {
        &self.constraint_roots
    }

    /// Indices of every ground constraint the strategy violates.
    pub fn violated_constraints(&self, strategy: &Strategy) -> Vec<usize> {
        let decisions = strategy.decision_values(self.gp);
        let bdd = self.bdd.borrow();
        (0..self.constraint_roots.len())
            .filter(|&c| {
                bdd.eval(self.constraint_roots[c], |v| {
                    decisions.get(v as usize).copied().unwrap_or(false)
                })
            })
            .collect()
    }

    /// Decision ids the function depends on.
    pub fn decision_support(&self, root: NodeId) -> Vec<usize> {
        let decisions = self.decision_count();
        self.bdd()
            .support(root)
            .into_iter()
            .filter(|&v| v < decisions)
            .map(|v| v as usize)
            .collect()
    }

    fn choice_count(&self, node: NodeId) -> f64 {
        let bdd = self.bdd.borrow();
        let mut counts = self.counts.borrow_mut();
        let decisions = self.decision_count();
        for id in counts.len()..bdd.len() {
            let value = match id as NodeId {
                FALSE => 0.0,
                TRUE => 1.0,
                n => {
                    let node = bdd.node(n);
                    if node.var < decisions {
                        f64::NAN
                    } else {
                        let w = self.weights[(node.var - decisions) as usize];
                        w * counts[node.high as usize] + (1.0 - w) * counts[node.low as usize]
                    }
                }
            };
            counts.push(value);
        }
        counts[node as usize]
    }

    /// Weighted model count of `root` with the decision variables fixed to `decisions`.
    pub fn wmc(&self, root: NodeId, decisions: &[bool]) -> f64 {
        let mut n = root;
        {
            let bdd = self.bdd.borrow();
            let d = self.decision_count();
            while !Bdd::is_terminal(n) {
                let node = bdd.node(n);
                if node.var >= d {
                    break;
                }
                n = if decisions[node.var as usize] {
                    node.high
                } else {
                    node.low
                };
            }
        }
        self.choice_count(n)
    }

    /// `P(root)` and `P(root, v = true)` for each listed binary variable. The root must not
    /// depend on decisions.
    pub fn joint_with_vars(&self, root: NodeId, vars: &[u32]) -> (f64, Vec<f64>) {
        let total = self.choice_count(root);
        let bdd = self.bdd.borrow();
        let counts = self.counts.borrow();
        let order = bdd.reachable(root);
        let mut down = std::collections::HashMap::new();
        down.insert(root, 1.0);
        // through[v]: mass of root paths testing v; high[v]: of those, mass with v true
        let mut through = std::collections::HashMap::<u32, f64>::new();
        let mut high = std::collections::HashMap::<u32, f64>::new();
        for &n in &order {
            if Bdd::is_terminal(n) {
                continue;
            }
            let node = bdd.node(n);
            let reach = down.get(&n).copied().unwrap_or(0.0);
            let w = self.weights[(node.var - self.decision_count()) as usize];
            *through.entry(node.var).or_default() += reach * counts[n as usize];
            *high.entry(node.var).or_default() += reach * w * counts[node.high as usize];
            *down.entry(node.high).or_default() += reach * w;
            *down.entry(node.low).or_default() += reach * (1.0 - w);
        }
        let joint = vars
            .iter()
            .map(|v| {
                let w = self.weight(*v);
                let tested = through.get(v).copied().unwrap_or(0.0);
                high.get(v).copied().unwrap_or(0.0) + w * (total - tested)
            })
            .collect();
        (total, joint)
    }

    /// Whether the strategy satisfies every exactly-one group and no constraint body.
    pub fn admissibility(&self) -> Result<NodeId> {
        let mut bdd = self.bdd.borrow_mut();
        let mut acc = TRUE;
        for g in &self.gp.groups {
            let mut exactly_one = FALSE;
            for &i in &g.members {
                let mut term = TRUE;
                for &j in &g.members {
                    let v = bdd.var(j as u32)?;
                    let lit = if i == j { v } else { bdd.not(v)? };
                    term = bdd.and(term, lit)?;
                }
                exactly_one = bdd.or(exactly_one, term)?;
            }
            acc = bdd.and(acc, exactly_one)?;
        }
        for &c in &self.constraint_roots {
            let nc = bdd.not(c)?;
            acc = bdd.and(acc, nc)?;
        }
        Ok(acc)
    }

    /// Compiles an atom by Shannon expansion over the full variable order, evaluating each
    /// complete assignment with the least-model semantics. Exponential; meant for
    /// cross-checking the symbolic compilation on small programs.
    pub fn compile_by_expansion(&self, atom: AtomId) -> Result<NodeId> {
        let total = self.variable_count() as usize;
        if total > EXPANSION_LIMIT {
            return Err(Error::Unsupported(format!(
                "expansion over {total} variables exceeds the limit of {EXPANSION_LIMIT}"
            )));
        }
        let oracle = Oracle::new(self.gp);
        let mut assignment = vec![false; total];
        let mut bdd = self.bdd.borrow_mut();
        self.expand(&oracle, &mut bdd, atom, 0, &mut assignment)
    }

    fn expand(
        &self,
        oracle: &Oracle<'_>,
        bdd: &mut Bdd,
        atom: AtomId,
        level: usize,
        assignment: &mut Vec<bool>,
    ) -> Result<NodeId> {
        if level == assignment.len() {
            let d = self.gp.decisions.len();
            let outcomes = self
                .choice_vars
                .iter()
                .map(|vars| {
                    vars.iter()
                        .position(|&v| assignment[v as usize])
                        .unwrap_or(vars.len())
                })
                .collect();
            let world = World {
                outcomes,
                probability: 0.0,
            };
            let model = oracle.model(&world, &assignment[..d]);
            return Ok(if model[atom.index()] { TRUE } else { FALSE });
        }
        assignment[level] = false;
        let low = self.expand(oracle, bdd, atom, level + 1, assignment)?;
        assignment[level] = true;
        let high = self.expand(oracle, bdd, atom, level + 1, assignment)?;
        assignment[level] = false;
        bdd.mk(level as u32, low, high)
    }

    /// Same contract as [`Engine::expected_utility`].
    pub fn eu_fast(&self, strategy: &Strategy) -> Result<super::EUReport> {
        self.expected_utility(strategy)
    }
}

impl Engine for CircuitEngine<'_> {
    fn program(&self) -> &GroundProgram {
        self.gp
    }

    fn conditional(
        &self,
        strategy: &Strategy,
        query: &Evidence,
        evidence: &Evidence,
    ) -> Result<f64> {
        strategy.validate(self.gp)?;
        let decisions = strategy.decision_values(self.gp);
        let e = self.conjunction(evidence)?;
        let e = self.bdd.borrow_mut().and(e, self.evidence)?;
        let q = self.conjunction(query)?;
        let q = self.bdd.borrow_mut().and(q, e)?;
        let given = self.wmc(e, &decisions);
        if given <= 0.0 {
            return Err(Error::InconsistentEvidence);
        }
        Ok(self.wmc(q, &decisions) / given)
    }

    fn utility_probabilities(&self, strategy: &Strategy) -> Result<Vec<f64>> {
        strategy.validate(self.gp)?;
        let decisions = strategy.decision_values(self.gp);
        let given = self.wmc(self.evidence, &decisions);
        if given <= 0.0 {
            return Err(Error::InconsistentEvidence);
        }
        Ok(self
            .utility_roots
            .iter()
            .map(|&r| self.wmc(r, &decisions) / given)
            .collect())
    }

    fn violated_constraint(&self, strategy: &Strategy) -> Result<Option<usize>> {
        strategy.validate(self.gp)?;
        Ok(self.violated_constraints(strategy).first().copied())
    }
}
