//! Acceptance gate: one PASS/FAIL line per criterion; exits non-zero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use ddtep_core::engine::{enumerate_worlds, CircuitEngine, Engine, Oracle, Strategy};
use ddtep_core::learn::{em_fit, parse_dataset, EmOptions};
use ddtep_core::solver::{solve_exhaustive, StrategySpace, DEFAULT_STRATEGY_CAP};
use ddtep_core::syntax::{desugar, parse_program, render};
use ddtep_core::GroundProgram;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{close, eu, load, source, PROGRAMS};

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn expect_eu(gp: &GroundProgram, labels: &[&str], expected: f64, tol: f64) -> Check {
    let got = eu(gp, labels);
    ensure(close(got, expected, tol), || {
        format!("EU({}) = {got}, expected {expected}", labels.join("+"))
    })
}

fn best(gp: &GroundProgram) -> (Vec<String>, f64, Vec<Vec<String>>) {
    let circuit = CircuitEngine::new(gp).unwrap();
    let space = StrategySpace::new(&circuit).unwrap();
    let s = solve_exhaustive(&circuit, &space, DEFAULT_STRATEGY_CAP).unwrap();
    let ties = s.ties.iter().map(|t| t.chosen_labels(gp)).collect();
    (s.best.strategy.chosen_labels(gp), s.best.total, ties)
}

fn expect_best(gp: &GroundProgram, labels: &[&str], total: f64, tol: f64) -> Check {
    let (got, value, _) = best(gp);
    ensure(got == labels && close(value, total, tol), || {
        format!("solve returned {got:?} at {value}, expected {labels:?} at {total}")
    })
}

fn admissible(gp: &GroundProgram) -> Vec<Strategy> {
    let circuit = CircuitEngine::new(gp).unwrap();
    let space = StrategySpace::new(&circuit).unwrap();
    space.enumerate(DEFAULT_STRATEGY_CAP).unwrap()
}

fn car() -> Check {
    let gp = load("car");
    expect_eu(&gp, &["run_into_wall"], -30.0, 1e-9)?;
    expect_eu(&gp, &["carmageddon"], -50.0, 1e-9)?;
    expect_best(&gp, &["run_into_wall"], -30.0, 1e-9)
}

fn cake_basic() -> Check {
    let gp = load("cake");
    expect_eu(&gp, &["bake_cake"], 0.5, 1e-9)?;
    expect_eu(&gp, &["kill"], 1.5, 1e-9)?;
    let ask = ["ask", "informed_bake", "informed_kill"];
    expect_eu(&gp, &ask, 2.0, 1e-9)?;
    expect_best(&gp, &ask, 2.0, 1e-9)
}

fn cake_people() -> Check {
    let gp = load("cake_people");
    expect_eu(&gp, &["kill"], 3.5, 1e-9)?;
    expect_eu(&gp, &["ask", "informed_bake", "informed_kill"], 4.0, 1e-9)
}

fn cake_likes() -> Check {
    let gp = load("cake_likes");
    expect_eu(&gp, &["bake_cake"], 2.455, 1e-9)?;
    let (before, _, _) = best(&gp);
    ensure(before.first().map(String::as_str) == Some("ask"), || {
        format!("cheap asking should be optimal, got {before:?}")
    })?;
    let (after, _, _) = best(&load("cake_likes_expensive_ask"));
    ensure(after == ["kill"], || {
        format!("expensive asking should flip the optimum to kill, got {after:?}")
    })
}

fn burning_room() -> Check {
    let gp = load("burning_room");
    expect_eu(&gp, &["long"], 5.6, 1e-9)?;
    expect_eu(&gp, &["short"], 5.625, 1e-9)?;
    expect_eu(&gp, &["ask"], 7.675, 1e-9)?;
    expect_best(&gp, &["ask"], 7.675, 1e-9)
}

fn archives() -> Check {
    expect_best(
        &load("archives"),
        &["give(ann,stamps)", "give(carol,area51)"],
        92.91,
        1e-6,
    )
}

fn archives_learned() -> Check {
    let (_, total, ties) = best(&load("archives_learned"));
    ensure(close(total, 101.0, 1e-6), || {
        format!("best EU {total}, expected 101")
    })?;
    for pair in [
        ["give(ann,stamps)", "give(dan,area51)"],
        ["give(ann,area51)", "give(dan,stamps)"],
    ] {
        ensure(ties.iter().any(|t| t == &pair), || {
            format!("tie set {ties:?} lacks {pair:?}")
        })?;
    }
    Ok(())
}

fn oracle_circuit_equivalence() -> Check {
    for name in PROGRAMS {
        let gp = load(name);
        let oracle = Oracle::new(&gp);
        let circuit = CircuitEngine::new(&gp).unwrap();
        for s in admissible(&gp) {
            let a = oracle.expected_utility(&s).unwrap().total;
            let b = circuit.eu_fast(&s).unwrap().total;
            ensure((a - b).abs() < 1e-9, || {
                format!(
                    "{name} {:?}: oracle {a} vs circuit {b}",
                    s.chosen_labels(&gp)
                )
            })?;
        }
    }
    Ok(())
}

fn world_normalization() -> Check {
    for name in PROGRAMS {
        let gp = load(name);
        let total: f64 = enumerate_worlds(&gp, 1 << 24)
            .unwrap()
            .map(|w| w.probability)
            .sum();
        ensure(close(total, 1.0, 1e-9), || {
            format!("{name}: worlds sum to {total}")
        })?;
    }
    Ok(())
}

fn strategy_counts() -> Check {
    for (name, expected) in [
        ("car", 2),
        ("cake", 12),
        ("burning_room", 3),
        ("archives", 12),
    ] {
        let gp = load(name);
        let circuit = CircuitEngine::new(&gp).unwrap();
        let space = StrategySpace::new(&circuit).unwrap();
        let listed = admissible(&gp).len();
        ensure(
            listed == expected && space.admissible_count() == expected as f64,
            || format!("{name}: {listed} admissible strategies, expected {expected}"),
        )?;
    }
    Ok(())
}

fn monotone(trace: &[f64]) -> bool {
    trace.windows(2).all(|w| w[1] >= w[0] - 1e-12)
}

fn em_properties() -> Check {
    // (a) corpus fit
    let core = desugar(&parse_program(&source("archives_learn")).unwrap()).unwrap();
    let data = parse_dataset(&source("impact_evidence")).unwrap();
    let fit = em_fit(&core, &data, &EmOptions::default()).unwrap();
    ensure(monotone(&fit.loglik_trace), || {
        format!("corpus trace not monotone: {:?}", fit.loglik_trace)
    })?;

    // (b) synthetic recovery from 1000 fully observed draws at 0.3
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let draws: Vec<bool> = (0..1000).map(|_| rng.random_bool(0.3)).collect();
    let text: String = draws
        .iter()
        .map(|d| format!("evidence(heads, {d}).\n\n"))
        .collect();
    let core = desugar(&parse_program("t(0.5)::heads.").unwrap()).unwrap();
    let data = parse_dataset(&text).unwrap();
    let fit = em_fit(&core, &data, &EmOptions::default()).unwrap();
    let theta = fit.params[0];
    ensure((0.25..=0.35).contains(&theta), || {
        format!("recovered {theta}")
    })?;
    ensure(monotone(&fit.loglik_trace), || {
        "synthetic trace not monotone".into()
    })?;

    // (c) degenerate case: one iteration gives the empirical frequency
    let one = EmOptions {
        max_iters: 1,
        ..EmOptions::default()
    };
    let fit = em_fit(&core, &data, &one).unwrap();
    let frequency = draws.iter().filter(|d| **d).count() as f64 / draws.len() as f64;
    ensure((fit.params[0] - frequency).abs() < 1e-12, || {
        format!(
            "one iteration gave {}, frequency {frequency}",
            fit.params[0]
        )
    })
}

fn scaled(gp: &GroundProgram, factor: f64) -> GroundProgram {
    let mut out = gp.clone();
    for u in &mut out.utilities {
        u.reward *= factor;
    }
    out
}

fn property_suite() -> Check {
    for name in PROGRAMS {
        let text = source(name);
        let program = parse_program(&text).unwrap();
        let again = parse_program(&render(&program)).unwrap();
        ensure(again == program, || {
            format!("{name}: render round-trip differs")
        })?;

        let gp = load(name);
        let circuit = CircuitEngine::new(&gp).unwrap();
        let strategies = admissible(&gp);

        // scaling
        let (_, total, ties) = best(&gp);
        let big = scaled(&gp, 2.5);
        let (_, big_total, big_ties) = best(&big);
        ensure(
            ties == big_ties && close(big_total, 2.5 * total, 1e-9),
            || format!("{name}: scaling changed the optimum"),
        )?;

        for s in &strategies {
            let base = circuit.expected_utility(s).unwrap();
            // shift each utility reward
            for (i, row) in base.atoms.iter().enumerate() {
                let mut shifted = gp.clone();
                shifted.utilities[i].reward += 0.75;
                let moved = CircuitEngine::new(&shifted)
                    .unwrap()
                    .expected_utility(s)
                    .unwrap()
                    .total;
                ensure(
                    close(moved - base.total, 0.75 * row.probability, 1e-9),
                    || format!("{name}: shifting {} broke linearity", row.atom),
                )?;
            }
            // conditioning on each utility atom
            let atoms: Vec<_> = gp.utilities.iter().map(|u| u.atom).collect();
            for &a in &atoms {
                for &e in &atoms {
                    let pe = circuit.marginal(s, e, &[]).unwrap();
                    let joint = circuit
                        .conditional(s, &[(a, true), (e, true)], &[])
                        .unwrap();
                    if pe > 0.0 {
                        let cond = circuit.marginal(s, a, &[(e, true)]).unwrap();
                        ensure(close(cond * pe, joint, 1e-9), || {
                            format!("{name}: P(a|e)P(e) != P(a,e)")
                        })?;
                    } else {
                        ensure(joint == 0.0, || {
                            format!("{name}: joint with impossible event")
                        })?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("car: EU -30 / -50, solve picks run_into_wall", car),
        ("cake: EU 0.5 / 1.5 / 2.0, solve picks ask", cake_basic),
        ("cake with seven people: EU kill 3.5, ask 4.0", cake_people),
        (
            "cake likes: bake 2.455, expensive ask flips optimum to kill",
            cake_likes,
        ),
        (
            "burning room: long 5.6, short 5.625, ask 7.675",
            burning_room,
        ),
        (
            "archives: optimum 92.91 with carol->area51, ann->stamps",
            archives,
        ),
        (
            "archives learned: EU 101 with both tied assignments",
            archives_learned,
        ),
        (
            "oracle and circuit agree on every admissible strategy",
            oracle_circuit_equivalence,
        ),
        ("world probabilities sum to one", world_normalization),
        (
            "admissible strategy counts: car 2, cake 12, burning room 3, archives 12",
            strategy_counts,
        ),
        (
            "EM: monotone likelihood, recovery at 0.3, exact one-step frequency",
            em_properties,
        ),
        (
            "properties: scaling, shift, conditioning, round-trip",
            property_suite,
        ),
    ];
    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".to_owned()));
        match outcome {
            Ok(()) => println!("PASS {:>2} {title}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {title}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
