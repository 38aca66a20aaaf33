//! A small reduced ordered binary decision diagram package with a shared unique table.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};

pub type NodeId = u32;

pub const FALSE: NodeId = 0;
pub const TRUE: NodeId = 1;

/// Variable index given to the two terminals; larger than every real variable.
const TERMINAL_VAR: u32 = u32::MAX;

/// Default limit on the number of live nodes in one manager.
pub const DEFAULT_NODE_CAP: usize = 1 << 23;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Node {
    pub var: u32,
    pub low: NodeId,
    pub high: NodeId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Op {
    And,
    Or,
}

#[derive(Debug, Clone)]
pub struct Bdd {
    nodes: Vec<Node>,
    unique: HashMap<Node, NodeId>,
    apply_cache: HashMap<(Op, NodeId, NodeId), NodeId>,
    not_cache: HashMap<NodeId, NodeId>,
    cap: usize,
}

impl Default for Bdd {
    fn default() -> Self {
        Bdd::new(DEFAULT_NODE_CAP)
    }
}

impl Bdd {
    pub fn new(cap: usize) -> Self {
        let terminal = |v| Node {
            var: TERMINAL_VAR,
            low: v,
            high: v,
        };
        Bdd {
            nodes: vec![terminal(FALSE), terminal(TRUE)],
            unique: HashMap::new(),
            apply_cache: HashMap::new(),
            not_cache: HashMap::new(),
            cap,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() <= 2
    }

    pub fn node(&self, id: NodeId) -> Node {
        self.nodes[id as usize]
    }

    pub fn is_terminal(id: NodeId) -> bool {
        id <= TRUE
    }

    /// The node for `if var then high else low`, reusing an existing one when possible.
    pub fn mk(&mut self, var: u32, low: NodeId, high: NodeId) -> Result<NodeId> {
        if low == high {
            return Ok(low);
        }
        let node = Node { var, low, high };
        if let Some(&id) = self.unique.get(&node) {
            return Ok(id);
        }
        if self.nodes.len() >= self.cap {
            return Err(Error::NodeCap { cap: self.cap });
        }
        let id = self.nodes.len() as NodeId;
        self.nodes.push(node);
        self.unique.insert(node, id);
        Ok(id)
    }

    pub fn var(&mut self, var: u32) -> Result<NodeId> {
        self.mk(var, FALSE, TRUE)
    }

    pub fn not(&mut self, a: NodeId) -> Result<NodeId> {
        match a {
            FALSE => return Ok(TRUE),
            TRUE => return Ok(FALSE),
            _ => {}
        }
        if let Some(&r) = self.not_cache.get(&a) {
            return Ok(r);
        }
        let n = self.node(a);
        let low = self.not(n.low)?;
        let high = self.not(n.high)?;
        let r = self.mk(n.var, low, high)?;
        self.not_cache.insert(a, r);
        Ok(r)
    }

    pub fn and(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.apply(Op::And, a, b)
    }

    pub fn or(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.apply(Op::Or, a, b)
    }

    pub fn and_all(&mut self, items: impl IntoIterator<Item = NodeId>) -> Result<NodeId> {
        let mut acc = TRUE;
        for x in items {
            acc = self.and(acc, x)?;
            if acc == FALSE {
                break;
            }
        }
        Ok(acc)
    }

    fn apply(&mut self, op: Op, a: NodeId, b: NodeId) -> Result<NodeId> {
        let terminal = match op {
            Op::And => match (a, b) {
                (FALSE, _) | (_, FALSE) => Some(FALSE),
                (TRUE, x) | (x, TRUE) => Some(x),
                _ if a == b => Some(a),
                _ => None,
            },
            Op::Or => match (a, b) {
                (TRUE, _) | (_, TRUE) => Some(TRUE),
                (FALSE, x) | (x, FALSE) => Some(x),
                _ if a == b => Some(a),
                _ => None,
            },
        };
        if let Some(r) = terminal {
            return Ok(r);
        }
        let key = (op, a.min(b), a.max(b));
        if let Some(&r) = self.apply_cache.get(&key) {
            return Ok(r);
        }
        let (na, nb) = (self.node(a), self.node(b));
        let var = na.var.min(nb.var);
        let (a0, a1) = if na.var == var {
            (na.low, na.high)
        } else {
            (a, a)
        };
        let (b0, b1) = if nb.var == var {
            (nb.low, nb.high)
        } else {
            (b, b)
        };
        let low = self.apply(op, a0, b0)?;
        let high = self.apply(op, a1, b1)?;
        let r = self.mk(var, low, high)?;
        self.apply_cache.insert(key, r);
        Ok(r)
    }

    /// Evaluates the function under a total assignment.
    pub fn eval(&self, mut id: NodeId, value: impl Fn(u32) -> bool) -> bool {
        while !Bdd::is_terminal(id) {
            let n = self.node(id);
            id = if value(n.var) { n.high } else { n.low };
        }
        id == TRUE
    }

    /// Variables the function depends on.
    pub fn support(&self, root: NodeId) -> BTreeSet<u32> {
        self.reachable(root)
            .into_iter()
            .filter(|&n| !Bdd::is_terminal(n))
            .map(|n| self.node(n).var)
            .collect()
    }

    /// Non-terminal and terminal nodes reachable from `root`, in decreasing id order
    /// (parents before children).
    pub fn reachable(&self, root: NodeId) -> Vec<NodeId> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![root];
        while let Some(n) = stack.pop() {
            if seen.insert(n) && !Bdd::is_terminal(n) {
                let node = self.node(n);
                stack.push(node.low);
                stack.push(node.high);
            }
        }
        seen.into_iter().rev().collect()
    }

    /// Number of satisfying assignments over variables `0..vars`.
    pub fn sat_count(&self, root: NodeId, vars: u32) -> f64 {
        let mut memo: HashMap<NodeId, f64> = HashMap::new();
        // count(n) counts assignments to variables var(n)..vars
        fn count(bdd: &Bdd, n: NodeId, vars: u32, memo: &mut HashMap<NodeId, f64>) -> f64 {
            if n == FALSE {
                return 0.0;
            }
            if n == TRUE {
                return 1.0;
            }
            if let Some(&c) = memo.get(&n) {
                return c;
            }
            let node = bdd.node(n);
            let level = |m: NodeId| {
                if Bdd::is_terminal(m) {
                    vars
                } else {
                    bdd.node(m).var
                }
            };
            let lo = count(bdd, node.low, vars, memo)
                * 2f64.powi((level(node.low) - node.var - 1) as i32);
            let hi = count(bdd, node.high, vars, memo)
                * 2f64.powi((level(node.high) - node.var - 1) as i32);
            memo.insert(n, lo + hi);
            lo + hi
        }
        let top = if Bdd::is_terminal(root) {
            vars
        } else {
            self.node(root).var
        };
        count(self, root, vars, &mut memo) * 2f64.powi(top as i32)
    }

    /// Whether every node reachable from `root` respects the variable order and no node is
    /// redundant or duplicated.
    pub fn is_reduced_ordered(&self, root: NodeId) -> bool {
        let mut seen = HashMap::new();
        for n in self.reachable(root) {
            if Bdd::is_terminal(n) {
                continue;
            }
            let node = self.node(n);
            let ordered = [node.low, node.high]
                .iter()
                .all(|&c| Bdd::is_terminal(c) || self.node(c).var > node.var);
            if !ordered || node.low == node.high || seen.insert(node, n).is_some() {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boolean_identities() {
        let mut b = Bdd::default();
        let x = b.var(0).unwrap();
        let y = b.var(1).unwrap();
        let nx = b.not(x).unwrap();
        assert_eq!(b.and(x, nx).unwrap(), FALSE);
        assert_eq!(b.or(x, nx).unwrap(), TRUE);
        let xy = b.and(x, y).unwrap();
        let yx = b.and(y, x).unwrap();
        assert_eq!(xy, yx);
        // De Morgan gives the same canonical node.
        let ny = b.not(y).unwrap();
        let or = b.or(nx, ny).unwrap();
        assert_eq!(b.not(xy).unwrap(), or);
        assert!(b.is_reduced_ordered(or));
    }

    #[test]
    fn counting_and_support() {
        let mut b = Bdd::default();
        let x = b.var(0).unwrap();
        let z = b.var(2).unwrap();
        let f = b.or(x, z).unwrap();
        assert_eq!(b.sat_count(f, 3), 6.0);
        assert_eq!(b.sat_count(TRUE, 3), 8.0);
        assert_eq!(b.sat_count(FALSE, 3), 0.0);
        assert_eq!(b.support(f), [0, 2].into());
        assert!(b.eval(f, |v| v == 2));
        assert!(!b.eval(f, |_| false));
    }

    #[test]
    fn node_cap_is_enforced() {
        let mut b = Bdd::new(4);
        b.var(0).unwrap();
        b.var(1).unwrap();
        assert_eq!(b.var(2), Err(Error::NodeCap { cap: 4 }));
    }
}
