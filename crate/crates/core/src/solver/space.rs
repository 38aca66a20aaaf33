use std::collections::HashMap;

use rand::Rng;

use crate::engine::bdd::{Bdd, NodeId, FALSE, TRUE};
use crate::engine::{CircuitEngine, Strategy};
use crate::error::{Error, Result};
use crate::ground::GroundProgram;

/// The admissible strategies of a program: exactly one alternative per group and no
/// satisfied constraint body, as a decision diagram over the decision variables.
pub struct StrategySpace<'a> {
    circuit: &'a CircuitEngine<'a>,
    root: NodeId,
    decisions: u32,
    /// Completions below each node, counted over variables from the node's level on.
    counts: HashMap<NodeId, f64>,
}

impl<'a> StrategySpace<'a> {
    pub fn new(circuit: &'a CircuitEngine<'a>) -> Result<StrategySpace<'a>> {
        let root = circuit.admissibility()?;
        let mut space = StrategySpace {
            circuit,
            root,
            decisions: circuit.decision_count(),
            counts: HashMap::new(),
        };
        let bdd = circuit.bdd();
        for n in bdd.reachable(root).into_iter().rev() {
            let c = space.count_node(&bdd, n);
            space.counts.insert(n, c);
        }
        drop(bdd);
        Ok(space)
    }

    pub fn program(&self) -> &GroundProgram {
        use crate::engine::Engine;
        self.circuit.program()
    }

    fn level(&self, bdd: &Bdd, n: NodeId) -> u32 {
        if Bdd::is_terminal(n) {
            self.decisions
        } else {
            bdd.node(n).var.min(self.decisions)
        }
    }

    /// Counts of children are already in the table (children have smaller ids).
    fn count_node(&self, bdd: &Bdd, n: NodeId) -> f64 {
        match n {
            FALSE => 0.0,
            TRUE => 1.0,
            _ => {
                let node = bdd.node(n);
                if node.var >= self.decisions {
                    // constraint atoms never depend on choices; treat as satisfiable
                    return 1.0;
                }
                let half = |c: NodeId| {
                    self.counts[&c] * 2f64.powi((self.level(bdd, c) - node.var - 1) as i32)
                };
                half(node.low) + half(node.high)
            }
        }
    }

    /// Strategies before filtering: product of group sizes times `2^free`.
    pub fn raw_size(&self) -> f64 {
        let gp = self.program();
        gp.groups
            .iter()
            .map(|g| g.members.len() as f64)
            .product::<f64>()
            * 2f64.powi(gp.free_count() as i32)
    }

    pub fn admissible_count(&self) -> f64 {
        let bdd = self.circuit.bdd();
        self.counts[&self.root] * 2f64.powi(self.level(&bdd, self.root) as i32)
    }

    pub fn contains(&self, strategy: &Strategy) -> bool {
        if strategy.validate(self.program()).is_err() {
            return false;
        }
        let values = strategy.decision_values(self.program());
        self.circuit.bdd().eval(self.root, |v| {
            values.get(v as usize).copied().unwrap_or(false)
        })
    }

    /// Number of ground constraints the strategy violates.
    pub fn violations(&self, strategy: &Strategy) -> usize {
        self.circuit.violated_constraints(strategy).len()
    }

    /// Every admissible strategy in canonical order.
    pub fn enumerate(&self, cap: u64) -> Result<Vec<Strategy>> {
        let count = self.admissible_count();
        if count > cap as f64 {
            return Err(Error::StrategyCap { count, cap });
        }
        let gp = self.program();
        let in_group: Vec<bool> = gp.decisions.iter().map(|d| d.group.is_some()).collect();
        let bdd = self.circuit.bdd();
        let mut out = Vec::new();
        let mut values = vec![false; gp.decisions.len()];
        self.walk(&bdd, &in_group, 0, self.root, &mut values, &mut out)?;
        Ok(out)
    }

    fn walk(
        &self,
        bdd: &Bdd,
        in_group: &[bool],
        level: u32,
        node: NodeId,
        values: &mut Vec<bool>,
        out: &mut Vec<Strategy>,
    ) -> Result<()> {
        if node == FALSE {
            return Ok(());
        }
        if level == self.decisions {
            out.push(Strategy::from_decision_values(self.program(), values)?);
            return Ok(());
        }
        let (low, high) = if self.level(bdd, node) == level {
            let n = bdd.node(node);
            (n.low, n.high)
        } else {
            (node, node)
        };
        // group alternatives are listed by the position of their true member, free
        // decisions with false first: both give canonical strategy order
        let order = if in_group[level as usize] {
            [(true, high), (false, low)]
        } else {
            [(false, low), (true, high)]
        };
        for (value, child) in order {
            values[level as usize] = value;
            self.walk(bdd, in_group, level + 1, child, values, out)?;
        }
        values[level as usize] = false;
        Ok(())
    }

    /// A uniformly random admissible strategy, or `None` when there is none.
    pub fn sample(&self, rng: &mut impl Rng) -> Option<Strategy> {
        if self.root == FALSE {
            return None;
        }
        let gp = self.program();
        let bdd = self.circuit.bdd();
        let mut values = vec![false; gp.decisions.len()];
        let mut node = self.root;
        for level in 0..self.decisions {
            if self.level(&bdd, node) == level {
                let n = bdd.node(node);
                let weight = |c: NodeId| {
                    self.counts[&c] * 2f64.powi((self.level(&bdd, c) - level - 1) as i32)
                };
                let (wl, wh) = (weight(n.low), weight(n.high));
                let take_high = rng.random::<f64>() * (wl + wh) >= wl;
                values[level as usize] = take_high;
                node = if take_high { n.high } else { n.low };
            } else {
                values[level as usize] = rng.random::<bool>();
            }
        }
        Strategy::from_decision_values(gp, &values).ok()
    }
}
