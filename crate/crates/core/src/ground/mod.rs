//! Grounding: static evaluation, relevant instantiation of probabilistic and decision
//! clauses, and a canonical variable-free program.

mod bind;
mod grounder;
mod program;
mod stratify;

pub use bind::{eval_builtin, match_atom, substitute, substitute_atom, Bindings};
pub use grounder::ground;
pub use program::*;
pub use stratify::{stratify, Dependency};
