use std::fmt::{self, Display, Write};

use super::ast::*;

impl Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Variable(name) | Term::Constant(name) => f.write_str(name),
            Term::Number(n) => write!(f, "{n}"),
            Term::List(items, tail) => {
                f.write_char('[')?;
                write_joined(f, items, ",")?;
                if let Some(tail) = tail {
                    write!(f, "|{tail}")?;
                }
                f.write_char(']')
            }
            Term::Compound(name, args) => {
                write!(f, "{name}(")?;
                write_joined(f, args, ",")?;
                f.write_char(')')
            }
        }
    }
}

impl Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.predicate == "\\=" && self.args.len() == 2 {
            return write!(f, "{} \\= {}", self.args[0], self.args[1]);
        }
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_char('(')?;
            write_joined(f, &self.args, ",")?;
            f.write_char(')')?;
        }
        Ok(())
    }
}

impl Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("\\+")?;
        }
        write!(f, "{}", self.atom)
    }
}

impl Display for BodyItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyItem::Literal(lit) => write!(f, "{lit}"),
            BodyItem::Disjunction(branches) => {
                f.write_char('(')?;
                for (i, branch) in branches.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    write_joined(f, branch, ", ")?;
                }
                f.write_char(')')
            }
        }
    }
}

impl Display for ProbExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbExpr::Fixed(p) => write!(f, "{}", Number(*p)),
            ProbExpr::Learnable(Some(p)) => write!(f, "t({})", Number(*p)),
            ProbExpr::Learnable(None) => f.write_str("t(_)"),
        }
    }
}

impl Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::AnnotatedDisjunction { heads, body } => {
                for (i, (p, h)) in heads.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{p}::{h}")?;
                }
                write_body(f, body)
            }
            Statement::DecisionGroup { alternatives } => {
                for (i, a) in alternatives.iter().enumerate() {
                    if i > 0 {
                        f.write_char(';')?;
                    }
                    write!(f, "?::{a}")?;
                }
                f.write_char('.')
            }
            Statement::DecisionRule { head, body } => {
                write!(f, "?::{head}")?;
                write_body(f, body)
            }
            Statement::Rule { head, body } => {
                write!(f, "{head}")?;
                write_body(f, body)
            }
            Statement::Utility {
                target,
                reward,
                guard,
            } => {
                write!(f, "utility({target}, {})", Number(*reward))?;
                write_body(f, guard)
            }
            Statement::Constraint { body } => {
                f.write_str(":- ")?;
                write_joined(f, body, ", ")?;
                f.write_char('.')
            }
            Statement::Evidence { atom, truth } => write!(f, "evidence({atom}, {truth})."),
        }
    }
}

fn write_body<T: Display>(f: &mut fmt::Formatter<'_>, body: &[T]) -> fmt::Result {
    if !body.is_empty() {
        f.write_str(" :- ")?;
        write_joined(f, body, ", ")?;
    }
    f.write_char('.')
}

fn write_joined<T: Display>(f: &mut fmt::Formatter<'_>, items: &[T], sep: &str) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

impl Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for statement in &self.statements {
            writeln!(f, "{statement}")?;
        }
        Ok(())
    }
}

/// Source text for a program, one statement per line.
pub fn render(program: &Program) -> String {
    program.to_string()
}
