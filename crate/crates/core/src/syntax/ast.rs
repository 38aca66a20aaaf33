use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::Location;

/// A decimal literal with total equality, so it can live inside hashed terms.
#[derive(Debug, Clone, Copy)]
pub struct Number(pub f64);

impl Number {
    fn key(self) -> u64 {
        // -0.0 and 0.0 are the same constant
        if self.0 == 0.0 {
            0
        } else {
            self.0.to_bits()
        }
    }
}

impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Number {}

impl Hash for Number {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl PartialOrd for Number {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Number {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            Ordering::Equal
        } else {
            self.0.total_cmp(&other.0)
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0.0 {
            write!(f, "0")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Variable(String),
    Constant(String),
    Number(Number),
    /// `[a, b | Tail]`; the tail is absent for proper lists.
    List(Vec<Term>, Option<Box<Term>>),
    Compound(String, Vec<Term>),
}

impl Term {
    pub fn is_ground(&self) -> bool {
        match self {
            Term::Variable(_) => false,
            Term::Constant(_) | Term::Number(_) => true,
            Term::List(items, tail) => {
                items.iter().all(Term::is_ground) && tail.as_ref().is_none_or(|t| t.is_ground())
            }
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Collects variable names in first-occurrence order, skipping `_`.
    pub fn collect_variables(&self, out: &mut Vec<String>) {
        match self {
            Term::Variable(name) => {
                if name != "_" && !out.contains(name) {
                    out.push(name.clone());
                }
            }
            Term::Constant(_) | Term::Number(_) => {}
            Term::List(items, tail) => {
                for item in items {
                    item.collect_variables(out);
                }
                if let Some(tail) = tail {
                    tail.collect_variables(out);
                }
            }
            Term::Compound(_, args) => {
                for arg in args {
                    arg.collect_variables(out);
                }
            }
        }
    }

    /// Constants and numbers occurring anywhere inside the term.
    pub fn collect_constants(&self, out: &mut std::collections::BTreeSet<Term>) {
        match self {
            Term::Variable(_) => {}
            Term::Constant(_) | Term::Number(_) => {
                out.insert(self.clone());
            }
            Term::List(items, tail) => {
                for item in items {
                    item.collect_constants(out);
                }
                if let Some(tail) = tail {
                    tail.collect_constants(out);
                }
            }
            Term::Compound(_, args) => {
                for arg in args {
                    arg.collect_constants(out);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn constant(predicate: impl Into<String>) -> Self {
        Atom::new(predicate, Vec::new())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_variables(&mut out);
        out
    }

    pub fn collect_variables(&self, out: &mut Vec<String>) {
        for arg in &self.args {
            arg.collect_variables(out);
        }
    }

    /// `name/arity`
    pub fn signature(&self) -> String {
        format!("{}/{}", self.predicate, self.args.len())
    }

    pub fn is_builtin(&self) -> bool {
        matches!(
            (self.predicate.as_str(), self.args.len()),
            ("member", 2) | ("\\=", 2)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub atom: Atom,
    pub negated: bool,
}

impl Literal {
    pub fn positive(atom: Atom) -> Self {
        Literal {
            atom,
            negated: false,
        }
    }

    pub fn negative(atom: Atom) -> Self {
        Literal {
            atom,
            negated: true,
        }
    }
}

/// A body element as written in source: a literal or a parenthesised disjunction of conjunctions.
#[derive(Debug, Clone, PartialEq)]
pub enum BodyItem {
    Literal(Literal),
    Disjunction(Vec<Vec<BodyItem>>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbExpr {
    Fixed(f64),
    /// `t(P0)` or `t(_)`
    Learnable(Option<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    AnnotatedDisjunction {
        heads: Vec<(ProbExpr, Atom)>,
        body: Vec<BodyItem>,
    },
    DecisionGroup {
        alternatives: Vec<Atom>,
    },
    DecisionRule {
        head: Atom,
        body: Vec<BodyItem>,
    },
    Rule {
        head: Atom,
        body: Vec<BodyItem>,
    },
    Utility {
        target: Atom,
        reward: f64,
        guard: Vec<BodyItem>,
    },
    Constraint {
        body: Vec<BodyItem>,
    },
    Evidence {
        atom: Atom,
        truth: bool,
    },
}

#[derive(Debug, Clone, Default)]
pub struct Program {
    pub statements: Vec<Statement>,
    /// Start location of each statement, parallel to `statements`.
    pub locations: Vec<Location>,
}

/// Programs compare by their statements only; source locations are not structure.
impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.statements == other.statements
    }
}

impl Program {
    pub fn location(&self, index: usize) -> Location {
        self.locations.get(index).copied().unwrap_or_default()
    }

    /// Indices of statements carrying a `t(...)` parameter.
    pub fn learnable_statements(&self) -> Vec<usize> {
        self.statements
            .iter()
            .enumerate()
            .filter(|(_, s)| match s {
                Statement::AnnotatedDisjunction { heads, .. } => heads
                    .iter()
                    .any(|(p, _)| matches!(p, ProbExpr::Learnable(_))),
                _ => false,
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Replaces the probability of every single-head annotated disjunction listed in `values`
    /// (keyed by statement index) with a fixed constant.
    pub fn with_probabilities(&self, values: &std::collections::BTreeMap<usize, f64>) -> Program {
        let mut out = self.clone();
        for (&index, &value) in values {
            if let Some(Statement::AnnotatedDisjunction { heads, .. }) =
                out.statements.get_mut(index)
            {
                if let [(prob, _)] = heads.as_mut_slice() {
                    *prob = ProbExpr::Fixed(value);
                }
            }
        }
        out
    }
}
