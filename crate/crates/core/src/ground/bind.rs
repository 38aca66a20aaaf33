//! Substitutions, one-way matching against ground terms, and the `member/2` and `\=/2` builtins.

use crate::error::{Error, Result};
use crate::syntax::{Atom, Literal, Term};

/// Variable bindings, in binding order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bindings(Vec<(String, Term)>);

impl Bindings {
    pub fn new() -> Self {
        Bindings(Vec::new())
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.0.iter().find(|(v, _)| v == var).map(|(_, t)| t)
    }

    pub fn bind(&mut self, var: &str, value: Term) {
        self.0.push((var.to_owned(), value));
    }

    pub fn is_bound(&self, var: &str) -> bool {
        var != "_" && self.get(var).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.0.iter().map(|(v, t)| (v.as_str(), t))
    }
}

/// Applies bindings; unbound variables stay in place. Lists with list tails are flattened.
pub fn substitute(term: &Term, b: &Bindings) -> Term {
    match term {
        Term::Variable(v) => match b.get(v) {
            Some(t) if v != "_" => t.clone(),
            _ => term.clone(),
        },
        Term::Constant(_) | Term::Number(_) => term.clone(),
        Term::List(items, tail) => {
            let mut items: Vec<Term> = items.iter().map(|t| substitute(t, b)).collect();
            let mut tail = tail.as_ref().map(|t| substitute(t, b));
            while let Some(Term::List(more, rest)) = tail {
                items.extend(more);
                tail = rest.map(|r| *r);
            }
            Term::List(items, tail.map(Box::new))
        }
        Term::Compound(f, args) => {
            Term::Compound(f.clone(), args.iter().map(|t| substitute(t, b)).collect())
        }
    }
}

pub fn substitute_atom(atom: &Atom, b: &Bindings) -> Atom {
    Atom::new(
        atom.predicate.clone(),
        atom.args.iter().map(|t| substitute(t, b)).collect(),
    )
}

/// Matches `pattern` against a ground term, extending `b`.
pub fn match_term(pattern: &Term, ground: &Term, b: &mut Bindings) -> bool {
    match pattern {
        Term::Variable(v) if v == "_" => true,
        Term::Variable(v) => match b.get(v) {
            Some(bound) => bound == ground,
            None => {
                b.bind(v, ground.clone());
                true
            }
        },
        Term::Constant(_) | Term::Number(_) => pattern == ground,
        Term::Compound(f, args) => match ground {
            Term::Compound(g, gargs) if f == g && args.len() == gargs.len() => {
                args.iter().zip(gargs).all(|(p, g)| match_term(p, g, b))
            }
            _ => false,
        },
        Term::List(items, tail) => match ground {
            Term::List(gitems, None) => {
                let fits = match tail {
                    None => items.len() == gitems.len(),
                    Some(_) => items.len() <= gitems.len(),
                };
                if !fits || !items.iter().zip(gitems).all(|(p, g)| match_term(p, g, b)) {
                    return false;
                }
                match tail {
                    None => true,
                    Some(t) => match_term(t, &Term::List(gitems[items.len()..].to_vec(), None), b),
                }
            }
            _ => false,
        },
    }
}

pub fn match_atom(pattern: &Atom, ground: &Atom, b: &mut Bindings) -> bool {
    pattern.predicate == ground.predicate
        && pattern.args.len() == ground.args.len()
        && pattern
            .args
            .iter()
            .zip(&ground.args)
            .all(|(p, g)| match_term(p, g, b))
}

fn term_is_bound(term: &Term, b: &Bindings) -> bool {
    substitute(term, b).is_ground()
}

/// Whether the builtin can run under `b`: `member` needs its list, `\=` needs both sides.
pub fn builtin_ready(atom: &Atom, b: &Bindings) -> bool {
    match atom.predicate.as_str() {
        "member" => term_is_bound(&atom.args[1], b),
        _ => atom.args.iter().all(|t| term_is_bound(t, b)),
    }
}

/// Evaluates a `member/2` or `\=/2` literal, returning every extension of `b` that satisfies it.
pub fn eval_builtin(literal: &Literal, b: &Bindings, clause: &str) -> Result<Vec<Bindings>> {
    let atom = &literal.atom;
    if !builtin_ready(atom, b)
        || (literal.negated && !atom.args.iter().all(|t| term_is_bound(t, b)))
    {
        return Err(Error::Instantiation {
            builtin: atom.signature(),
            clause: clause.to_owned(),
        });
    }
    let solutions = match atom.predicate.as_str() {
        "member" => match substitute(&atom.args[1], b) {
            Term::List(items, None) => items
                .iter()
                .filter_map(|item| {
                    let mut ext = b.clone();
                    match_term(&atom.args[0], item, &mut ext).then_some(ext)
                })
                .collect(),
            _ => Vec::new(),
        },
        "\\=" => {
            if substitute(&atom.args[0], b) != substitute(&atom.args[1], b) {
                vec![b.clone()]
            } else {
                Vec::new()
            }
        }
        other => {
            return Err(Error::Unsupported(format!("unknown builtin {other}")));
        }
    };
    if literal.negated {
        Ok(if solutions.is_empty() {
            vec![b.clone()]
        } else {
            Vec::new()
        })
    } else {
        Ok(solutions)
    }
}
