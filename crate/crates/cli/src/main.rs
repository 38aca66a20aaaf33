//! `ddtep`: solve, evaluate, query, learn, verify and explain decision-theoretic programs.

mod report;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use ddtep_core::engine::{enumerate_worlds, EUReport, Oracle, DEFAULT_WORLD_CAP};
use ddtep_core::ground::{ground, AtomId};
use ddtep_core::learn::{em_fit, parse_dataset, EmOptions};
use ddtep_core::solver::{
    check_guarantee, solve_exhaustive, solve_local, verify_bounds, LocalOptions,
    DEFAULT_STRATEGY_CAP,
};
use ddtep_core::syntax::{desugar, parse_atom, render, Atom};
use ddtep_core::{CircuitEngine, Engine, Error, GroundProgram, Program, Strategy, StrategySpace};

use report::{labels, Bounds, Fit, FitParam, RunReport, SearchInfo, WorldRow};

/// Largest world count `explain --worlds` will print.
const EXPLAIN_WORLD_LIMIT: u64 = 256;

#[derive(Debug, Parser)]
#[command(
    name = "ddtep",
    version,
    about = "Decision-theoretic probabilistic logic programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Find the strategy with the highest expected utility.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = SolveMethod::Exhaustive)]
        method: SolveMethod,
        /// Seed for local search.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random restarts for local search.
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        /// Step limit per restart for local search.
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
    },
    /// Expected utility of one strategy.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Decisions taken, e.g. `kill=true` or `give(ann,stamps),give(carol,area51)`.
        #[arg(long, allow_hyphen_values = true)]
        set: String,
    },
    /// Marginal or conditional probability of a ground atom.
    Query {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        atom: String,
        /// Decisions taken; optional when the atom does not depend on any decision.
        #[arg(long)]
        strategy: Option<String>,
        /// Observed atoms, e.g. `fire=false,rvip`.
        #[arg(long)]
        evidence: Option<String>,
    },
    /// Fit `t(...)` parameters to evidence with EM.
    Learn {
        #[command(flatten)]
        common: Common,
        /// Evidence file; blank lines separate examples.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 100)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        /// Seed for initializing parameters declared without a value.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the program with the fitted probabilities.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expected-utility bounds over all admissible strategies.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Exit 1 unless every admissible strategy reaches this expected utility.
        #[arg(long, allow_negative_numbers = true)]
        at_least: Option<f64>,
    },
    /// Per-atom breakdown of one strategy, optionally with every world.
    Explain {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        strategy: String,
        /// Also list every world with the utility atoms that hold in it.
        #[arg(long)]
        worlds: bool,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Program file.
    program: PathBuf,
    /// Print the JSON report instead of text.
    #[arg(long)]
    json: bool,
    #[arg(long, value_enum, default_value_t = EngineKind::Circuit)]
    engine: EngineKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolveMethod {
    Exhaustive,
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EngineKind {
    Oracle,
    Circuit,
}

/// Failure of one command, mapped to an exit code.
#[derive(Debug)]
enum Failure {
    /// Error attributed to a file.
    Program {
        path: PathBuf,
        error: Error,
    },
    Usage(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Program { error, .. } if error.is_resource() => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Program { path, error } => {
                // located errors already start with `line:column:`
                let text = error.to_string();
                let sep = if text.starts_with(|c: char| c.is_ascii_digit()) {
                    ":"
                } else {
                    ": "
                };
                write!(f, "{}{sep}{text}", path.display())
            }
            Failure::Usage(message) => f.write_str(message),
        }
    }
}

/// Text output plus the JSON report of a successful command.
struct Outcome {
    text: String,
    report: RunReport,
    code: u8,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let json = cli.command.common().json;
    let echo = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    match run(&cli.command) {
        Ok(mut outcome) => {
            for w in &outcome.report.warnings {
                eprintln!("warning: {w}");
            }
            if json {
                outcome.report.command = echo;
                outcome.report.duration_ms = started.elapsed().as_secs_f64() * 1000.0;
                let text =
                    serde_json::to_string_pretty(&outcome.report).expect("report serializes");
                println!("{text}");
            } else {
                print!("{}", outcome.text);
            }
            ExitCode::from(outcome.code)
        }
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Solve { common, .. }
            | Command::Eval { common, .. }
            | Command::Query { common, .. }
            | Command::Learn { common, .. }
            | Command::Verify { common, .. }
            | Command::Explain { common, .. } => common,
        }
    }
}

/// Formats a number with 9 decimals and no negative zero.
fn fmt9(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.9}")
}

fn world_cap() -> Result<u64, Failure> {
    match std::env::var("DDTEP_WORLD_CAP") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("DDTEP_WORLD_CAP must be an integer, got `{v}`"))),
        Err(_) => Ok(DEFAULT_WORLD_CAP),
    }
}

/// A loaded program file.
struct Loaded {
    path: PathBuf,
    ground: GroundProgram,
    sha256: String,
}

impl Loaded {
    fn fail(&self, error: Error) -> Failure {
        Failure::Program {
            path: self.path.clone(),
            error,
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn parse(path: &Path) -> Result<(Program, String), Failure> {
    let text = read(path)?;
    let sha256 = hex::encode(Sha256::digest(text.as_bytes()));
    let program = ddtep_core::parse_program(&text).map_err(|error| Failure::Program {
        path: path.to_owned(),
        error,
    })?;
    Ok((program, sha256))
}

fn load(path: &Path) -> Result<Loaded, Failure> {
    let (program, sha256) = parse(path)?;
    let fail = |error| Failure::Program {
        path: path.to_owned(),
        error,
    };
    let core = desugar(&program).map_err(fail)?;
    let ground = ground(&core, &Default::default()).map_err(fail)?;
    ground.require_parameters().map_err(fail)?;
    Ok(Loaded {
        path: path.to_owned(),
        ground,
        sha256,
    })
}

/// Splits a comma-separated list, keeping commas inside parentheses.
fn split_items(text: &str) -> Vec<&str> {
    let mut items = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                items.push(text[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    items.push(text[start..].trim());
    items.into_iter().filter(|s| !s.is_empty()).collect()
}

/// Parses `atom` or `atom=true|false` items.
fn parse_assignments(text: &str) -> Result<Vec<(Atom, bool)>, Failure> {
    split_items(text)
        .into_iter()
        .map(|item| {
            let (atom, value) = match item.rsplit_once('=') {
                Some((a, v)) => {
                    let value = match v.trim() {
                        "true" => true,
                        "false" => false,
                        other => {
                            return Err(Failure::Usage(format!(
                                "expected true or false for {a}, got `{other}`"
                            )))
                        }
                    };
                    (a.trim(), value)
                }
                None => (item, true),
            };
            let atom = parse_atom(atom)
                .map_err(|e| Failure::Usage(format!("invalid atom `{atom}`: {e}")))?;
            if !atom.is_ground() {
                return Err(Failure::Usage(format!("atom `{atom}` is not ground")));
            }
            Ok((atom, value))
        })
        .collect()
}

/// Builds a strategy from decision assignments; unmentioned free decisions are false.
fn parse_strategy(loaded: &Loaded, text: &str) -> Result<Strategy, Failure> {
    let gp = &loaded.ground;
    let mut values = vec![false; gp.decisions.len()];
    for (atom, value) in parse_assignments(text)? {
        let found = gp
            .decisions
            .iter()
            .find(|d| gp.atoms.atom(d.label) == &atom);
        match found {
            Some(d) => values[d.id] = value,
            None => {
                let known: Vec<String> = gp.decisions.iter().map(|d| gp.name(d.label)).collect();
                return Err(Failure::Usage(format!(
                    "{atom} is not a decision; decisions are: {}",
                    known.join(", ")
                )));
            }
        }
    }
    Strategy::from_decision_values(gp, &values).map_err(|e| loaded.fail(e))
}

/// Runs `f` with the engine selected on the command line.
fn with_engine<R>(
    loaded: &Loaded,
    kind: EngineKind,
    circuit: &CircuitEngine<'_>,
    f: impl FnOnce(&dyn Engine) -> Result<R, Error>,
) -> Result<R, Failure> {
    let result = match kind {
        EngineKind::Circuit => f(circuit),
        EngineKind::Oracle => {
            let oracle = Oracle::with_cap(&loaded.ground, world_cap()?);
            f(&oracle)
        }
    };
    result.map_err(|e| loaded.fail(e))
}

fn strategy_text(gp: &GroundProgram, strategy: &Strategy) -> String {
    let chosen = labels(gp, strategy);
    if chosen.is_empty() {
        "(no decisions)".to_owned()
    } else {
        chosen.join(", ")
    }
}

fn eu_table(report: &EUReport) -> String {
    let width = report
        .atoms
        .iter()
        .map(|r| r.atom.len())
        .max()
        .unwrap_or(0)
        .max(4);
    let mut out = format!(
        "  {:<width$}  {:>12}  {:>14}  {:>14}\n",
        "atom", "probability", "reward", "contribution"
    );
    for row in &report.atoms {
        out += &format!(
            "  {:<width$}  {:>12}  {:>14}  {:>14}\n",
            row.atom,
            fmt9(row.probability),
            fmt9(row.reward),
            fmt9(row.contribution)
        );
    }
    out
}

fn base_report(loaded: &Loaded) -> RunReport {
    RunReport {
        program_sha256: loaded.sha256.clone(),
        warnings: loaded.ground.warnings.clone(),
        ..RunReport::default()
    }
}

fn fill_eu(report: &mut RunReport, gp: &GroundProgram, eu: &EUReport) {
    report.strategy = Some(labels(gp, &eu.strategy));
    report.total_eu = Some(eu.total);
    report.atoms = Some(eu.atoms.clone());
}

fn run(command: &Command) -> Result<Outcome, Failure> {
    match command {
        Command::Solve {
            common,
            method,
            seed,
            restarts,
            max_steps,
        } => solve(common, *method, *seed, *restarts, *max_steps),
        Command::Eval { common, set } => eval(common, set),
        Command::Query {
            common,
            atom,
            strategy,
            evidence,
        } => query(common, atom, strategy.as_deref(), evidence.as_deref()),
        Command::Learn {
            common,
            data,
            max_iters,
            tol,
            seed,
            out,
        } => learn(common, data, *max_iters, *tol, *seed, out.as_deref()),
        Command::Verify { common, at_least } => verify(common, *at_least),
        Command::Explain {
            common,
            strategy,
            worlds,
        } => explain(common, strategy, *worlds),
    }
}

fn compile<'g>(loaded: &'g Loaded) -> Result<CircuitEngine<'g>, Failure> {
    CircuitEngine::new(&loaded.ground).map_err(|e| loaded.fail(e))
}

fn solve(
    common: &Common,
    method: SolveMethod,
    seed: u64,
    restarts: usize,
    max_steps: usize,
) -> Result<Outcome, Failure> {
    let loaded = load(&common.program)?;
    let gp = &loaded.ground;
    let circuit = compile(&loaded)?;
    let space = StrategySpace::new(&circuit).map_err(|e| loaded.fail(e))?;
    let solution = with_engine(&loaded, common.engine, &circuit, |engine| match method {
        SolveMethod::Exhaustive => solve_exhaustive(engine, &space, DEFAULT_STRATEGY_CAP),
        SolveMethod::Local => solve_local(
            engine,
            &space,
            LocalOptions {
                seed,
                restarts,
                max_steps,
            },
        ),
    })?;

    let mut report = base_report(&loaded);
    fill_eu(&mut report, gp, &solution.best);
    let method_name = match method {
        SolveMethod::Exhaustive => "exhaustive",
        SolveMethod::Local => "local",
    };
    report.search = Some(SearchInfo {
        method: method_name,
        explored: solution.explored,
        certified: solution.certified,
    });
    if method == SolveMethod::Exhaustive {
        report.ties = Some(solution.ties.iter().map(|s| labels(gp, s)).collect());
    }

    let mut text = format!(
        "strategy: {}\nexpected utility: {}\n",
        strategy_text(gp, &solution.best.strategy),
        fmt9(solution.best.total)
    );
    text += &eu_table(&solution.best);
    if solution.ties.len() > 1 {
        text += &format!(
            "ties: {} strategies within 1e-9 of the best\n",
            solution.ties.len()
        );
        for s in &solution.ties {
            text += &format!("  - {}\n", strategy_text(gp, s));
        }
    }
    text += &format!(
        "method: {method_name} ({} strategies evaluated{})\n",
        solution.explored,
        if solution.certified {
            ""
        } else {
            ", not certified optimal"
        }
    );
    Ok(Outcome {
        text,
        report,
        code: 0,
    })
}

fn eval(common: &Common, set: &str) -> Result<Outcome, Failure> {
    let loaded = load(&common.program)?;
    let gp = &loaded.ground;
    let strategy = parse_strategy(&loaded, set)?;
    let circuit = compile(&loaded)?;
    let eu = with_engine(&loaded, common.engine, &circuit, |e| {
        e.expected_utility(&strategy)
    })?;
    let mut report = base_report(&loaded);
    fill_eu(&mut report, gp, &eu);
    let text = format!(
        "strategy: {}\nexpected utility: {}\n{}",
        strategy_text(gp, &eu.strategy),
        fmt9(eu.total),
        eu_table(&eu)
    );
    Ok(Outcome {
        text,
        report,
        code: 0,
    })
}

fn query(
    common: &Common,
    atom: &str,
    strategy: Option<&str>,
    evidence: Option<&str>,
) -> Result<Outcome, Failure> {
    let loaded = load(&common.program)?;
    let gp = &loaded.ground;
    let target =
        parse_atom(atom).map_err(|e| Failure::Usage(format!("invalid atom `{atom}`: {e}")))?;
    if !target.is_ground() {
        return Err(Failure::Usage(format!("atom `{target}` is not ground")));
    }
    let mut report = base_report(&loaded);

    // observed atoms outside the vocabulary are false in every world
    let mut literals: Vec<(AtomId, bool)> = Vec::new();
    for (a, truth) in parse_assignments(evidence.unwrap_or(""))? {
        match gp.lookup(&a) {
            Some(id) => literals.push((id, truth)),
            None if truth => return Err(loaded.fail(Error::InconsistentEvidence)),
            None => {}
        }
    }

    let circuit = compile(&loaded)?;
    let strategy = match strategy {
        Some(text) => {
            let strategy = parse_strategy(&loaded, text)?;
            with_engine(&loaded, common.engine, &circuit, |e| {
                e.check_admissible(&strategy)
            })?;
            strategy
        }
        None => {
            let mut involved = Vec::new();
            let roots = gp
                .lookup(&target)
                .into_iter()
                .chain(literals.iter().map(|l| l.0))
                .chain(gp.evidence.iter().map(|l| l.0));
            for a in roots {
                for d in circuit.decision_support(circuit.compile(a)) {
                    let name = gp.name(gp.decisions[d].label);
                    if !involved.contains(&name) {
                        involved.push(name);
                    }
                }
            }
            if !involved.is_empty() {
                return Err(Failure::Usage(format!(
                    "the query depends on decisions {}; pass --strategy",
                    involved.join(", ")
                )));
            }
            Strategy::first(gp)
        }
    };

    let probability = match gp.lookup(&target) {
        Some(id) => with_engine(&loaded, common.engine, &circuit, |e| {
            e.marginal(&strategy, id, &literals)
        })?,
        None => {
            // still reject impossible evidence before answering
            with_engine(&loaded, common.engine, &circuit, |e| {
                e.conditional(&strategy, &[], &literals)
            })?;
            report.warnings.push(format!(
                "{target} is not derivable in the program; its probability is 0"
            ));
            0.0
        }
    };
    report.strategy = strategy_given(gp, &strategy);
    report.probability = Some(probability);
    Ok(Outcome {
        text: format!("{}\n", fmt9(probability)),
        report,
        code: 0,
    })
}

fn strategy_given(gp: &GroundProgram, strategy: &Strategy) -> Option<Vec<String>> {
    (!gp.decisions.is_empty()).then(|| labels(gp, strategy))
}

fn learn(
    common: &Common,
    data: &Path,
    max_iters: usize,
    tol: f64,
    seed: u64,
    out: Option<&Path>,
) -> Result<Outcome, Failure> {
    let (program, sha256) = parse(&common.program)?;
    let fail = |error| Failure::Program {
        path: common.program.clone(),
        error,
    };
    let core = desugar(&program).map_err(fail)?;
    let dataset = parse_dataset(&read(data)?).map_err(|error| Failure::Program {
        path: data.to_owned(),
        error,
    })?;
    let options = EmOptions {
        max_iters,
        tol,
        seed,
        init: None,
    };
    let fit = em_fit(&core, &dataset, &options).map_err(|error| match error {
        Error::ImpossibleEvidence { .. } | Error::DecisionDependentEvidence { .. } => {
            Failure::Program {
                path: data.to_owned(),
                error,
            }
        }
        other => fail(other),
    })?;

    if let Some(out) = out {
        let values: BTreeMap<usize, f64> = fit
            .origins
            .iter()
            .copied()
            .zip(fit.params.iter().copied())
            .collect();
        std::fs::write(out, render(&program.with_probabilities(&values)))
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", out.display())))?;
    }

    let width = fit
        .clauses
        .iter()
        .map(|c| c.len())
        .max()
        .unwrap_or(0)
        .max(6);
    let mut text = format!(
        "{} examples, {} iterations, {}\n  {:<width$}  {:>12}\n",
        dataset.len(),
        fit.iterations,
        if fit.converged {
            "converged"
        } else {
            "not converged"
        },
        "clause",
        "probability"
    );
    for (clause, value) in fit.clauses.iter().zip(&fit.params) {
        text += &format!("  {clause:<width$}  {:>12}\n", fmt9(*value));
    }
    text += "log-likelihood:\n";
    for (i, ll) in fit.loglik_trace.iter().enumerate() {
        text += &format!("  {i:>4}  {}\n", fmt9(*ll));
    }
    if let Some(out) = out {
        text += &format!("wrote {}\n", out.display());
    }

    let report = RunReport {
        program_sha256: sha256,
        fit: Some(Fit {
            params: fit
                .clauses
                .iter()
                .zip(&fit.params)
                .map(|(clause, &value)| FitParam {
                    clause: clause.clone(),
                    value,
                })
                .collect(),
            loglik_trace: fit.loglik_trace.clone(),
            iterations: fit.iterations,
            converged: fit.converged,
            seed: fit.seed,
        }),
        warnings: fit.warnings.clone(),
        ..RunReport::default()
    };
    Ok(Outcome {
        text,
        report,
        code: 0,
    })
}

fn verify(common: &Common, at_least: Option<f64>) -> Result<Outcome, Failure> {
    let loaded = load(&common.program)?;
    let gp = &loaded.ground;
    let circuit = compile(&loaded)?;
    let space = StrategySpace::new(&circuit).map_err(|e| loaded.fail(e))?;
    let bounds = with_engine(&loaded, common.engine, &circuit, |e| {
        verify_bounds(e, &space, DEFAULT_STRATEGY_CAP)
    })?;
    let mut text = format!(
        "{} admissible strategies\nmin: {}  ({})\nmax: {}  ({})\n",
        bounds.explored,
        fmt9(bounds.min),
        strategy_text(gp, &bounds.argmin),
        fmt9(bounds.max),
        strategy_text(gp, &bounds.argmax)
    );
    let mut section = Bounds {
        min: bounds.min,
        argmin: labels(gp, &bounds.argmin),
        max: bounds.max,
        argmax: labels(gp, &bounds.argmax),
        threshold: None,
        holds: None,
    };
    let mut code = 0;
    if let Some(threshold) = at_least {
        let guarantee = check_guarantee(&bounds, threshold);
        section.threshold = Some(threshold);
        section.holds = Some(guarantee.holds);
        match &guarantee.counterexample {
            None => {
                text += &format!(
                    "guarantee holds: every strategy reaches {}\n",
                    fmt9(threshold)
                )
            }
            Some((s, eu)) => {
                code = 1;
                text += &format!(
                    "guarantee refuted: {} reaches only {} < {}\n",
                    strategy_text(gp, s),
                    fmt9(*eu),
                    fmt9(threshold)
                );
            }
        }
    }
    let mut report = base_report(&loaded);
    report.bounds = Some(section);
    Ok(Outcome { text, report, code })
}

fn explain(common: &Common, strategy: &str, worlds: bool) -> Result<Outcome, Failure> {
    let loaded = load(&common.program)?;
    let gp = &loaded.ground;
    let strategy = parse_strategy(&loaded, strategy)?;
    let circuit = compile(&loaded)?;
    let eu = with_engine(&loaded, common.engine, &circuit, |e| {
        e.expected_utility(&strategy)
    })?;
    let mut report = base_report(&loaded);
    fill_eu(&mut report, gp, &eu);
    let mut text = format!(
        "strategy: {}\nexpected utility: {}\n{}",
        strategy_text(gp, &strategy),
        fmt9(eu.total),
        eu_table(&eu)
    );

    if worlds {
        let cap = world_cap()?.min(EXPLAIN_WORLD_LIMIT);
        let oracle = Oracle::with_cap(gp, cap);
        let decisions = strategy.decision_values(gp);
        let mut rows = Vec::new();
        for world in enumerate_worlds(gp, cap).map_err(|e| loaded.fail(e))? {
            let model = oracle.model(&world, &decisions);
            rows.push(WorldRow {
                probability: world.probability,
                outcomes: world
                    .outcomes
                    .iter()
                    .zip(&gp.choices)
                    .map(|(&o, c)| c.outcomes[o].atom.map(|a| gp.name(a)))
                    .collect(),
                membership: gp.utilities.iter().map(|u| model[u.atom.index()]).collect(),
            });
        }
        text += &format!("worlds ({}):\n", rows.len());
        for row in &rows {
            let outcomes: Vec<&str> = row
                .outcomes
                .iter()
                .map(|o| o.as_deref().unwrap_or("-"))
                .collect();
            let holding: Vec<&str> = row
                .membership
                .iter()
                .zip(&eu.atoms)
                .filter(|(m, _)| **m)
                .map(|(_, r)| r.atom.as_str())
                .collect();
            text += &format!(
                "  {}  [{}]  utilities: {}\n",
                fmt9(row.probability),
                outcomes.join(", "),
                if holding.is_empty() {
                    "-".to_owned()
                } else {
                    holding.join(", ")
                }
            );
        }
        report.worlds = Some(rows);
    }
    Ok(Outcome {
        text,
        report,
        code: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn items_keep_commas_inside_parentheses() {
        assert_eq!(
            split_items("give(ann,stamps), give(carol,area51)"),
            ["give(ann,stamps)", "give(carol,area51)"]
        );
        assert!(split_items("  ").is_empty());
    }

    #[test]
    fn assignments_default_to_true() {
        let parsed = parse_assignments("kill, ask=false").unwrap();
        assert_eq!(parsed.len(), 2);
        assert!(parsed[0].1);
        assert!(!parsed[1].1);
        assert!(parse_assignments("kill=maybe").is_err());
        assert!(parse_assignments("p(X)").is_err());
    }

    #[test]
    fn nine_decimals_without_negative_zero() {
        assert_eq!(fmt9(-0.0), "0.000000000");
        assert_eq!(fmt9(7.675), "7.675000000");
    }
}
