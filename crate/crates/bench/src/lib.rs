//! Inputs for the ddtep benchmarks.

use std::path::PathBuf;

/// Text of a program shipped in the repository corpus.
pub fn corpus(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(format!("{name}.ddtep"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// An archives-style assignment program: `people` candidates with independent impact,
/// `topics` documents, and one document per person at most.
pub fn assignment_program(people: usize, topics: usize) -> String {
    let mut text = String::new();
    for p in 0..people {
        let prob = 0.1 + 0.8 * (p as f64 / people.max(1) as f64);
        text += &format!("person(p{p}). {prob:.3}::reach(p{p}).\n");
    }
    for t in 0..topics {
        text += &format!(
            "topic(t{t}). utility(score(P,t{t}), {}) :- person(P).\n",
            10 * (t + 1)
        );
    }
    text += "impact(P,T) :- topic(T), reach(P).\n";
    text += "?::give(P,T) :- person(P), topic(T).\n";
    text += "score(P,T) :- give(P,T), impact(P,T).\n";
    text += ":- give(P1,T), give(P2,T), P1 \\= P2.\n";
    text += ":- give(P,T1), give(P,T2), T1 \\= T2.\n";
    text += "assigned(T) :- give(P,T).\n:- topic(T), \\+ assigned(T).\n";
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assignment_program_counts() {
        let gp = ddtep_core::load(&assignment_program(4, 2)).unwrap();
        assert_eq!(gp.decisions.len(), 8);
        let circuit = ddtep_core::CircuitEngine::new(&gp).unwrap();
        let space = ddtep_core::StrategySpace::new(&circuit).unwrap();
        assert_eq!(space.admissible_count(), 12.0);
    }

    #[test]
    fn corpus_is_readable() {
        assert!(corpus("car").contains("carmageddon"));
    }
}
