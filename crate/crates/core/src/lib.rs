//! Decision-theoretic probabilistic logic programs.
//!
//! A program mixes probabilistic facts and annotated disjunctions, decision choices
//! (`?::a;?::b.` exactly-one groups and `?::h :- guard.` free decisions), deterministic
//! rules with stratified negation, `utility(Atom, Reward)` declarations and constraints.
//!
//! The pipeline is [`syntax::parse_program`] → [`syntax::desugar`] → [`ground::ground`],
//! after which the [`engine`] evaluates expected utilities (by world enumeration or by
//! compiled decision diagrams), the [`solver`] searches the strategy space, and the
//! [`learn`] module fits `t(...)` parameters with EM.

pub mod engine;
pub mod error;
pub mod ground;
pub mod learn;
pub mod solver;
pub mod syntax;

pub use engine::{CircuitEngine, EUReport, Engine, Oracle, Strategy};
pub use error::{Error, Location, Result};
pub use ground::{ground, GroundProgram};
pub use solver::{Solution, StrategySpace};
pub use syntax::{parse_program, Program};

/// Tolerance used when comparing probabilities and expected utilities.
pub const TOLERANCE: f64 = 1e-9;

/// Parses, desugars and grounds program text in one step.
pub fn load(text: &str) -> Result<GroundProgram> {
    let program = parse_program(text)?;
    let core = syntax::desugar(&program)?;
    ground(&core, &Default::default())
}
