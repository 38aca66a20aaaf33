//! Concrete syntax: tokens, the parsed program, desugaring into core clauses, and rendering.

mod ast;
mod desugar;
mod lexer;
mod parser;
mod render;

pub use ast::{Atom, BodyItem, Literal, Number, ProbExpr, Program, Statement, Term};
pub use desugar::{
    desugar, expand_body, herbrand_universe, CoreClause, CoreProgram, ParamDecl, Prob,
};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse_atom, parse_program, PROBABILITY_SLACK};
pub use render::render;
