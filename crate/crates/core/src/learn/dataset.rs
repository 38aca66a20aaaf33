use std::collections::BTreeSet;

use crate::error::{Error, Location, Result};
use crate::syntax::{parse_program, Atom, Statement, Term};

/// Partial interpretations for parameter learning.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    /// Observed `(atom, truth)` pairs per example.
    pub interpretations: Vec<Vec<(Atom, bool)>>,
    /// Constants mentioned by the observations.
    pub constants: BTreeSet<Term>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.interpretations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interpretations.is_empty()
    }
}

fn shift(error: Error, lines: usize) -> Error {
    let moved = |at: Location| Location {
        line: at.line + lines,
        column: at.column,
    };
    match error {
        Error::Lex { at, message } => Error::Lex {
            at: moved(at),
            message,
        },
        Error::Syntax { at, message } => Error::Syntax {
            at: moved(at),
            message,
        },
        Error::ArityMismatch {
            at,
            name,
            expected,
            found,
        } => Error::ArityMismatch {
            at: moved(at),
            name,
            expected,
            found,
        },
        other => other,
    }
}

/// Reads `evidence(Atom, true|false).` statements. Blocks of lines separated by blank lines
/// are separate examples; the statements of one block form one joint interpretation.
pub fn parse_dataset(text: &str) -> Result<Dataset> {
    let mut dataset = Dataset::default();
    let lines: Vec<&str> = text.lines().collect();
    let mut start = 0;
    while start < lines.len() {
        if lines[start].trim().is_empty() {
            start += 1;
            continue;
        }
        let mut end = start;
        while end < lines.len() && !lines[end].trim().is_empty() {
            end += 1;
        }
        let block = lines[start..end].join("\n");
        let program = parse_program(&block).map_err(|e| shift(e, start))?;
        let mut interpretation = Vec::new();
        for (i, statement) in program.statements.iter().enumerate() {
            match statement {
                Statement::Evidence { atom, truth } => {
                    for arg in &atom.args {
                        arg.collect_constants(&mut dataset.constants);
                    }
                    interpretation.push((atom.clone(), *truth));
                }
                other => {
                    let at = program.location(i);
                    return Err(Error::Syntax {
                        at: Location {
                            line: at.line + start,
                            column: at.column,
                        },
                        message: format!("expected an evidence statement, found `{other}`"),
                    });
                }
            }
        }
        if !interpretation.is_empty() {
            dataset.interpretations.push(interpretation);
        }
        start = end;
    }
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file() {
        assert!(parse_dataset("").unwrap().is_empty());
        assert!(parse_dataset("\n\n% nothing\n").unwrap().is_empty());
    }

    #[test]
    fn blank_lines_separate_examples() {
        let adjacent = "evidence(a, true).\nevidence(b, false).\n";
        let separated = "evidence(a, true).\n\nevidence(b, false).\n";
        assert_eq!(parse_dataset(adjacent).unwrap().len(), 1);
        assert_eq!(parse_dataset(separated).unwrap().len(), 2);
    }

    #[test]
    fn constants_collected() {
        let d = parse_dataset("evidence(impact(ann,t0),true).").unwrap();
        let names: Vec<String> = d.constants.iter().map(|t| t.to_string()).collect();
        assert_eq!(names, ["ann", "t0"]);
    }

    #[test]
    fn error_line_is_absolute() {
        let err = parse_dataset("evidence(a, true).\n\nevidence(b, true)\n").unwrap_err();
        match err {
            Error::Syntax { at, .. } => assert_eq!(at.line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_dataset("a :- b.").is_err());
    }
}
