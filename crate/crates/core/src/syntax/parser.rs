use std::collections::HashMap;

use super::ast::*;
use super::lexer::{tokenize, Token, TokenKind};
use crate::error::{Error, Location, Result};

/// Slack allowed when head probabilities of one disjunction are summed.
pub const PROBABILITY_SLACK: f64 = 1e-9;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: Location,
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        let tokens = tokenize(text)?;
        let end = end_location(text);
        Ok(Parser {
            tokens,
            pos: 0,
            end,
        })
    }

    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn here(&self) -> Location {
        self.tokens.get(self.pos).map_or(self.end, |t| t.at)
    }

    fn bump(&mut self) -> Option<TokenKind> {
        let tok = self.tokens.get(self.pos).map(|t| t.kind.clone());
        self.pos += 1;
        tok
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: &TokenKind, what: &str) -> Result<()> {
        if self.eat(kind) {
            Ok(())
        } else {
            Err(self.error(format!("expected {what}, found {}", self.describe())))
        }
    }

    fn describe(&self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(kind) => format!("`{}`", show(kind)),
        }
    }

    fn error(&self, message: String) -> Error {
        Error::Syntax {
            at: self.here(),
            message,
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn statement(&mut self) -> Result<Statement> {
        if self.eat(&TokenKind::Neck) {
            let body = self.body()?;
            self.expect(&TokenKind::Dot, "`.`")?;
            return Ok(Statement::Constraint { body });
        }
        if self.peek() == Some(&TokenKind::Question) {
            return self.decision();
        }

        let start = self.here();
        let first = self.term()?;
        if self.peek() == Some(&TokenKind::ColonColon) {
            return self.disjunction(first, start);
        }

        let head = term_to_atom(first).ok_or_else(|| Error::Syntax {
            at: start,
            message: "clause head must be an atom".into(),
        })?;
        let body = if self.eat(&TokenKind::Neck) {
            self.body()?
        } else {
            Vec::new()
        };
        self.expect(&TokenKind::Dot, "`.`")?;
        special_form(head, body, start)
    }

    fn decision(&mut self) -> Result<Statement> {
        let mut alternatives = Vec::new();
        loop {
            self.expect(&TokenKind::Question, "`?`")?;
            self.expect(&TokenKind::ColonColon, "`::` after `?`")?;
            alternatives.push(self.atom()?);
            if !self.eat(&TokenKind::Semicolon) {
                break;
            }
        }
        if self.eat(&TokenKind::Neck) {
            if alternatives.len() != 1 {
                return Err(self.error("a guarded decision has exactly one head".into()));
            }
            let body = self.body()?;
            self.expect(&TokenKind::Dot, "`.`")?;
            let head = alternatives.pop().expect("one head");
            return Ok(Statement::DecisionRule { head, body });
        }
        self.expect(&TokenKind::Dot, "`.`")?;
        if alternatives.len() == 1 {
            let head = alternatives.pop().expect("one head");
            Ok(Statement::DecisionRule {
                head,
                body: Vec::new(),
            })
        } else {
            Ok(Statement::DecisionGroup { alternatives })
        }
    }

    fn disjunction(&mut self, first: Term, start: Location) -> Result<Statement> {
        let mut heads = Vec::new();
        let mut prob_term = first;
        let mut at = start;
        loop {
            let prob = term_to_prob(&prob_term).ok_or_else(|| Error::Syntax {
                at,
                message: "expected a probability or t(P) before `::`".into(),
            })?;
            self.expect(&TokenKind::ColonColon, "`::`")?;
            heads.push((prob, self.atom()?));
            if !self.eat(&TokenKind::Semicolon) {
                break;
            }
            at = self.here();
            prob_term = self.term()?;
        }
        let body = if self.eat(&TokenKind::Neck) {
            self.body()?
        } else {
            Vec::new()
        };
        self.expect(&TokenKind::Dot, "`.`")?;
        Ok(Statement::AnnotatedDisjunction { heads, body })
    }

    fn atom(&mut self) -> Result<Atom> {
        let at = self.here();
        let term = self.term()?;
        term_to_atom(term).ok_or(Error::Syntax {
            at,
            message: "expected an atom".into(),
        })
    }

    fn body(&mut self) -> Result<Vec<BodyItem>> {
        let mut items = vec![self.body_item()?];
        while self.eat(&TokenKind::Comma) {
            items.push(self.body_item()?);
        }
        Ok(items)
    }

    fn body_item(&mut self) -> Result<BodyItem> {
        if self.eat(&TokenKind::LParen) {
            let mut branches = vec![self.body()?];
            while self.eat(&TokenKind::Semicolon) {
                branches.push(self.body()?);
            }
            self.expect(&TokenKind::RParen, "`)`")?;
            if branches.len() == 1 {
                let mut only = branches.pop().expect("one branch");
                if only.len() == 1 {
                    return Ok(only.pop().expect("one item"));
                }
                return Ok(BodyItem::Disjunction(vec![only]));
            }
            return Ok(BodyItem::Disjunction(branches));
        }
        self.literal().map(BodyItem::Literal)
    }

    fn literal(&mut self) -> Result<Literal> {
        if self.eat(&TokenKind::Not) {
            return Ok(Literal::negative(self.atom()?));
        }
        let at = self.here();
        let left = self.term()?;
        if self.eat(&TokenKind::NotEqual) {
            let right = self.term()?;
            return Ok(Literal::positive(Atom::new("\\=", vec![left, right])));
        }
        term_to_atom(left)
            .map(Literal::positive)
            .ok_or(Error::Syntax {
                at,
                message: "expected a literal".into(),
            })
    }

    fn term(&mut self) -> Result<Term> {
        match self.bump() {
            Some(TokenKind::Number(n)) => Ok(Term::Number(Number(n))),
            Some(TokenKind::Variable(name)) => Ok(Term::Variable(name)),
            Some(TokenKind::Ident(name)) => {
                if self.eat(&TokenKind::LParen) {
                    let args = self.term_list(&TokenKind::RParen)?;
                    self.expect(&TokenKind::RParen, "`)`")?;
                    Ok(Term::Compound(name, args))
                } else {
                    Ok(Term::Constant(name))
                }
            }
            Some(TokenKind::LBracket) => {
                if self.eat(&TokenKind::RBracket) {
                    return Ok(Term::List(Vec::new(), None));
                }
                let items = self.term_list(&TokenKind::RBracket)?;
                let tail = if self.eat(&TokenKind::Bar) {
                    Some(Box::new(self.term()?))
                } else {
                    None
                };
                self.expect(&TokenKind::RBracket, "`]`")?;
                Ok(Term::List(items, tail))
            }
            _ => {
                self.pos -= 1;
                Err(self.error(format!("expected a term, found {}", self.describe())))
            }
        }
    }

    fn term_list(&mut self, close: &TokenKind) -> Result<Vec<Term>> {
        if self.peek() == Some(close) {
            return Err(self.error("empty argument list".into()));
        }
        let mut args = vec![self.term()?];
        while self.eat(&TokenKind::Comma) {
            args.push(self.term()?);
        }
        Ok(args)
    }
}

fn end_location(text: &str) -> Location {
    let line = text.lines().count().max(1);
    let column = text.lines().last().map_or(0, |l| l.chars().count()) + 1;
    Location { line, column }
}

fn show(kind: &TokenKind) -> String {
    match kind {
        TokenKind::ColonColon => "::".into(),
        TokenKind::Neck => ":-".into(),
        TokenKind::Question => "?".into(),
        TokenKind::Semicolon => ";".into(),
        TokenKind::Comma => ",".into(),
        TokenKind::Not => "\\+".into(),
        TokenKind::NotEqual => "\\=".into(),
        TokenKind::LParen => "(".into(),
        TokenKind::RParen => ")".into(),
        TokenKind::LBracket => "[".into(),
        TokenKind::RBracket => "]".into(),
        TokenKind::Bar => "|".into(),
        TokenKind::Dot => ".".into(),
        TokenKind::Number(n) => n.to_string(),
        TokenKind::Ident(s) | TokenKind::Variable(s) => s.clone(),
    }
}

fn term_to_atom(term: Term) -> Option<Atom> {
    match term {
        Term::Constant(name) => Some(Atom::new(name, Vec::new())),
        Term::Compound(name, args) => Some(Atom::new(name, args)),
        _ => None,
    }
}

fn term_to_prob(term: &Term) -> Option<ProbExpr> {
    match term {
        Term::Number(n) => Some(ProbExpr::Fixed(n.0)),
        Term::Compound(name, args) if name == "t" && args.len() == 1 => match &args[0] {
            Term::Number(n) => Some(ProbExpr::Learnable(Some(n.0))),
            Term::Variable(_) => Some(ProbExpr::Learnable(None)),
            _ => None,
        },
        _ => None,
    }
}

fn special_form(head: Atom, body: Vec<BodyItem>, at: Location) -> Result<Statement> {
    match (head.predicate.as_str(), head.args.len()) {
        ("utility", 2) => {
            let mut args = head.args.into_iter();
            let target = term_to_atom(args.next().expect("two args")).ok_or(Error::Syntax {
                at,
                message: "utility target must be an atom".into(),
            })?;
            let reward = match args.next() {
                Some(Term::Number(n)) => n.0,
                _ => {
                    return Err(Error::Syntax {
                        at,
                        message: "utility reward must be a number".into(),
                    })
                }
            };
            Ok(Statement::Utility {
                target,
                reward,
                guard: body,
            })
        }
        ("evidence", 2) => {
            if !body.is_empty() {
                return Err(Error::Syntax {
                    at,
                    message: "evidence takes no body".into(),
                });
            }
            let mut args = head.args.into_iter();
            let atom = term_to_atom(args.next().expect("two args")).ok_or(Error::Syntax {
                at,
                message: "evidence target must be an atom".into(),
            })?;
            let truth = match args.next() {
                Some(Term::Constant(v)) if v == "true" => true,
                Some(Term::Constant(v)) if v == "false" => false,
                _ => {
                    return Err(Error::Syntax {
                        at,
                        message: "evidence value must be true or false".into(),
                    })
                }
            };
            Ok(Statement::Evidence { atom, truth })
        }
        _ => Ok(Statement::Rule { head, body }),
    }
}

/// Parses program text and checks the well-formedness rules: probability bounds,
/// consistent predicate arities and disjoint head roles.
pub fn parse_program(text: &str) -> Result<Program> {
    let mut parser = Parser::new(text)?;
    let mut program = Program::default();
    while !parser.at_end() {
        let at = parser.here();
        let statement = parser.statement()?;
        program.statements.push(statement);
        program.locations.push(at);
    }
    validate(&program)?;
    Ok(program)
}

/// Parses a single atom such as `give(carol,area51)`.
pub fn parse_atom(text: &str) -> Result<Atom> {
    let mut parser = Parser::new(text)?;
    let atom = parser.atom()?;
    if !parser.at_end() {
        return Err(parser.error(format!("unexpected {}", parser.describe())));
    }
    Ok(atom)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum HeadRole {
    Probabilistic,
    Decision,
    Deterministic,
}

impl HeadRole {
    fn name(self) -> &'static str {
        match self {
            HeadRole::Probabilistic => "probabilistic",
            HeadRole::Decision => "decision",
            HeadRole::Deterministic => "deterministic",
        }
    }
}

fn validate(program: &Program) -> Result<()> {
    let mut arities: HashMap<String, usize> = HashMap::new();
    let mut roles: HashMap<String, HeadRole> = HashMap::new();

    for (index, statement) in program.statements.iter().enumerate() {
        let at = program.location(index);
        let mut check_arity = |atom: &Atom| -> Result<()> {
            if atom.is_builtin() {
                return Ok(());
            }
            match arities.get(&atom.predicate) {
                Some(&expected) if expected != atom.arity() => Err(Error::ArityMismatch {
                    at,
                    name: atom.predicate.clone(),
                    expected,
                    found: atom.arity(),
                }),
                Some(_) => Ok(()),
                None => {
                    arities.insert(atom.predicate.clone(), atom.arity());
                    Ok(())
                }
            }
        };
        let mut atoms: Vec<&Atom> = Vec::new();
        let mut heads: Vec<(&Atom, HeadRole)> = Vec::new();
        match statement {
            Statement::AnnotatedDisjunction { heads: hs, body } => {
                check_probabilities(hs, at)?;
                for (_, h) in hs {
                    heads.push((h, HeadRole::Probabilistic));
                }
                collect_body_atoms(body, &mut atoms);
            }
            Statement::DecisionGroup { alternatives } => {
                for a in alternatives {
                    heads.push((a, HeadRole::Decision));
                }
            }
            Statement::DecisionRule { head, body } => {
                heads.push((head, HeadRole::Decision));
                collect_body_atoms(body, &mut atoms);
            }
            Statement::Rule { head, body } => {
                heads.push((head, HeadRole::Deterministic));
                collect_body_atoms(body, &mut atoms);
            }
            Statement::Utility { target, guard, .. } => {
                atoms.push(target);
                collect_body_atoms(guard, &mut atoms);
            }
            Statement::Constraint { body } => collect_body_atoms(body, &mut atoms),
            Statement::Evidence { atom, .. } => atoms.push(atom),
        }
        for (head, role) in &heads {
            if head.is_builtin() {
                return Err(Error::Syntax {
                    at,
                    message: format!("cannot redefine builtin {}", head.signature()),
                });
            }
            check_arity(head)?;
            match roles.get(&head.predicate) {
                Some(&previous) if previous != *role => {
                    return Err(Error::HeadRoleConflict {
                        at,
                        predicate: head.signature(),
                        first: previous.name(),
                        second: role.name(),
                    })
                }
                Some(_) => {}
                None => {
                    roles.insert(head.predicate.clone(), *role);
                }
            }
        }
        for atom in atoms {
            check_arity(atom)?;
        }
    }
    Ok(())
}

fn check_probabilities(heads: &[(ProbExpr, Atom)], at: Location) -> Result<()> {
    let mut sum = 0.0;
    for (prob, _) in heads {
        let value = match prob {
            ProbExpr::Fixed(p) => Some(*p),
            ProbExpr::Learnable(init) => *init,
        };
        if let Some(p) = value {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Probability {
                    at,
                    message: format!("{p} is outside [0, 1]"),
                });
            }
            if matches!(prob, ProbExpr::Fixed(_)) {
                sum += p;
            }
        }
    }
    if sum > 1.0 + PROBABILITY_SLACK {
        return Err(Error::Probability {
            at,
            message: format!("head probabilities sum to {sum} > 1"),
        });
    }
    Ok(())
}

fn collect_body_atoms<'a>(body: &'a [BodyItem], out: &mut Vec<&'a Atom>) {
    for item in body {
        match item {
            BodyItem::Literal(lit) => out.push(&lit.atom),
            BodyItem::Disjunction(branches) => {
                for branch in branches {
                    collect_body_atoms(branch, out);
                }
            }
        }
    }
}
