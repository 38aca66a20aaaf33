use thiserror::Error;

/// A position in program text, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl std::fmt::Display for Location {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{at}: lexical error: {message}")]
    Lex { at: Location, message: String },

    #[error("{at}: syntax error: {message}")]
    Syntax { at: Location, message: String },

    #[error("{at}: predicate {predicate} is used both as a {first} head and as a {second} head")]
    HeadRoleConflict {
        at: Location,
        predicate: String,
        first: &'static str,
        second: &'static str,
    },

    #[error("{at}: predicate {name} is used with arity {expected} and {found}")]
    ArityMismatch {
        at: Location,
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("{at}: invalid probability: {message}")]
    Probability { at: Location, message: String },

    #[error("variable {variable} is not range-restricted in clause `{clause}`")]
    RangeRestriction { variable: String, clause: String },

    #[error("instantiation error: {builtin} needs bound arguments in clause `{clause}`")]
    Instantiation { builtin: String, clause: String },

    #[error("unstratified negation through cycle {}", cycle.join(" -> "))]
    Unstratified { cycle: Vec<String> },

    #[error("utility guard of `{clause}` mentions non-static atom {atom}")]
    DynamicGuard { clause: String, atom: String },

    #[error("constraint `{clause}` depends on probabilistic atom {atom}")]
    ProbabilisticConstraint { clause: String, atom: String },

    #[error("parameter of `{clause}` has no value; give it an initial value t(P)")]
    UnsetParameter { clause: String },

    #[error("{0}")]
    Unsupported(String),

    #[error("world-space too large for oracle: {worlds} worlds exceed the cap of {cap}")]
    WorldCap { worlds: f64, cap: u64 },

    #[error("decision diagram exceeded the node cap of {cap}")]
    NodeCap { cap: usize },

    #[error("strategy space too large: {count} admissible strategies exceed the cap of {cap}; try local search")]
    StrategyCap { count: f64, cap: u64 },

    #[error("no admissible strategy")]
    NoAdmissibleStrategy,

    #[error("strategy violates constraint `{constraint}`")]
    ConstraintViolation { constraint: String },

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("inconsistent evidence: probability of the evidence is zero")]
    InconsistentEvidence,

    #[error("decision-dependent evidence: {atom} depends on decision {decision}")]
    DecisionDependentEvidence { atom: String, decision: String },

    #[error("impossible evidence in example {example}: its probability is zero")]
    ImpossibleEvidence { example: usize },

    #[error("nothing to learn: the program has no t(...) parameters")]
    NothingToLearn,
}

impl Error {
    /// Whether the error comes from a configured size cap rather than the program.
    pub fn is_resource(&self) -> bool {
        matches!(
            self,
            Error::WorldCap { .. } | Error::NodeCap { .. } | Error::StrategyCap { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
