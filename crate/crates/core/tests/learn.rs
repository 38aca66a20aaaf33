mod common;

use ddtep_core::learn::{
    e_step, em_fit, log_likelihood, m_step, parse_dataset, EmOptions, ExpectedCounts,
};
use ddtep_core::syntax::{desugar, parse_program, CoreProgram};
use ddtep_core::Error;

use common::source;

const LEARNED_PARAMS: [f64; 5] = [1.0, 0.99999999, 0.30399904, 0.39326198, 0.50403522];
const ORIGINAL_PARAMS: [f64; 5] = [0.9, 0.2, 0.9, 0.1, 0.5];

fn core(text: &str) -> CoreProgram {
    desugar(&parse_program(text).unwrap()).unwrap()
}

fn archives_core() -> CoreProgram {
    core(&source("archives_learn"))
}

/// The learning program with every observed document, including the never-cited t4 and t5,
/// declared as a topic.
fn archives_all_topics() -> CoreProgram {
    core(&(source("archives_learn") + "topic(t4). topic(t5).\n"))
}

fn impact_data() -> ddtep_core::learn::Dataset {
    parse_dataset(&source("impact_evidence")).unwrap()
}

fn monotone(trace: &[f64]) -> bool {
    trace.windows(2).all(|w| w[1] >= w[0] - 1e-12)
}

#[test]
fn impact_data_has_eleven_examples() {
    assert_eq!(impact_data().len(), 11);
}

#[test]
fn archives_fit_converges_with_high_authority() {
    let fit = em_fit(&archives_core(), &impact_data(), &EmOptions::default()).unwrap();
    assert!(fit.converged);
    assert!(
        fit.params[0] >= 0.9 && fit.params[1] >= 0.9,
        "{:?}",
        fit.params
    );
    assert!(monotone(&fit.loglik_trace));
    assert_eq!(fit.loglik_trace.len(), fit.iterations + 1);
    // reach for large networks and help/2 have no relevant instances
    assert_eq!(fit.params[2], 0.9);
    assert_eq!(fit.params[4], 0.5);
    assert_eq!(fit.warnings.len(), 2);
}

#[test]
fn learned_parameters_beat_original_ones() {
    let core = archives_core();
    let data = impact_data();
    let learned = log_likelihood(&core, &LEARNED_PARAMS, &data).unwrap();
    let original = log_likelihood(&core, &ORIGINAL_PARAMS, &data).unwrap();
    assert!(learned.is_finite());
    assert!(learned > original, "{learned} vs {original}");
}

#[test]
fn all_topics_fixture_matches_reference_optimum() {
    // maximum-likelihood values computed independently by numerical optimization
    let options = EmOptions {
        max_iters: 2000,
        tol: 1e-10,
        ..EmOptions::default()
    };
    let fit = em_fit(&archives_all_topics(), &impact_data(), &options).unwrap();
    let expected = [0.8406353, 0.0, 0.0, 0.3892975];
    for (got, want) in fit.params.iter().zip(expected) {
        assert!((got - want).abs() < 1e-4, "{:?}", fit.params);
    }
    assert!(monotone(&fit.loglik_trace));
    let ll = *fit.loglik_trace.last().unwrap();
    assert!((ll - -4.69662).abs() < 1e-4, "{ll}");
}

#[test]
fn all_topics_fixture_rules_out_learned_parameters() {
    // authority 1.0 makes the observed impact(ann,t5) = false impossible
    let core = archives_all_topics();
    let data = impact_data();
    assert!(matches!(
        log_likelihood(&core, &LEARNED_PARAMS, &data),
        Err(Error::ImpossibleEvidence { .. })
    ));
    assert!(log_likelihood(&core, &ORIGINAL_PARAMS, &data)
        .unwrap()
        .is_finite());
}

#[test]
fn zero_iterations_returns_initial_values() {
    let options = EmOptions {
        max_iters: 0,
        ..EmOptions::default()
    };
    let fit = em_fit(&archives_core(), &impact_data(), &options).unwrap();
    assert_eq!(fit.params, ORIGINAL_PARAMS);
    assert_eq!(fit.iterations, 0);
    assert_eq!(fit.loglik_trace.len(), 1);
    assert!(!fit.converged);
}

#[test]
fn explicit_init_overrides_declared_values() {
    let options = EmOptions {
        max_iters: 0,
        init: Some(LEARNED_PARAMS.to_vec()),
        ..EmOptions::default()
    };
    let fit = em_fit(&archives_core(), &impact_data(), &options).unwrap();
    assert_eq!(fit.params, LEARNED_PARAMS);
}

#[test]
fn fit_is_deterministic() {
    let core = core("t(_)::a. t(_)::b :- a. c :- b.");
    let data =
        parse_dataset("evidence(c,true).\n\nevidence(a,true).\nevidence(c,false).\n").unwrap();
    let options = EmOptions {
        seed: 11,
        ..EmOptions::default()
    };
    let first = em_fit(&core, &data, &options).unwrap();
    assert_eq!(first, em_fit(&core, &data, &options).unwrap());
    let other = EmOptions {
        seed: 12,
        max_iters: 0,
        ..EmOptions::default()
    };
    let fit = em_fit(&core, &data, &other).unwrap();
    assert_ne!(
        fit.params,
        em_fit(
            &core,
            &data,
            &EmOptions {
                max_iters: 0,
                ..options
            }
        )
        .unwrap()
        .params
    );
}

#[test]
fn partially_observed_chain_is_monotone() {
    let core = core("t(0.5)::a. t(0.5)::b :- a. t(0.2)::c. d :- b. d :- c.");
    let data = parse_dataset(
        "evidence(d,true).\n\nevidence(d,false).\n\nevidence(d,true).\nevidence(a,true).\n",
    )
    .unwrap();
    let fit = em_fit(&core, &data, &EmOptions::default()).unwrap();
    assert!(monotone(&fit.loglik_trace), "{:?}", fit.loglik_trace);
}

#[test]
fn e_step_counts_posteriors() {
    let core = core("t(0.5)::a. t(0.5)::b. c :- a. c :- b.");
    // P(a | c) = 0.5 / 0.75
    let data = parse_dataset("evidence(c,true).").unwrap();
    let counts = e_step(&core, &[0.5, 0.5], &data).unwrap();
    assert!((counts.counts[0] - 2.0 / 3.0).abs() < 1e-12);
    assert!((counts.counts[1] - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(counts.totals, [1.0, 1.0]);
    assert!((counts.log_likelihood - 0.75f64.ln()).abs() < 1e-12);
}

#[test]
fn e_step_ignores_unrelated_instances() {
    let core = core("t(0.5)::a. t(0.5)::b.");
    let data = parse_dataset("evidence(a,true).").unwrap();
    let counts = e_step(&core, &[0.5, 0.5], &data).unwrap();
    assert_eq!(counts.totals, [1.0, 0.0]);
}

#[test]
fn m_step_divides_and_clamps() {
    let counts = ExpectedCounts {
        counts: vec![3.0, 0.0, 2.0, 0.0],
        totals: vec![4.0, 5.0, 2.0, 0.0],
        log_likelihood: 0.0,
    };
    let (params, warnings) = m_step(&counts, &[0.5, 0.5, 0.5, 0.7]);
    assert_eq!(params[0], 0.75);
    assert_eq!(params[1], 1e-9);
    assert_eq!(params[2], 1.0 - 1e-9);
    assert_eq!(params[3], 0.7);
    assert_eq!(warnings.len(), 1);
}

#[test]
fn log_likelihood_of_independent_facts() {
    let core = core("t(0.3)::a. t(0.6)::b.");
    let data =
        parse_dataset("evidence(a,true).\nevidence(b,false).\n\nevidence(b,true).\n").unwrap();
    let ll = log_likelihood(&core, &[0.3, 0.6], &data).unwrap();
    assert!((ll - (0.3f64 * 0.4).ln() - 0.6f64.ln()).abs() < 1e-12);
}

#[test]
fn learning_errors() {
    let data = parse_dataset("evidence(a,true).").unwrap();
    assert_eq!(
        em_fit(&core("0.5::a."), &data, &EmOptions::default()),
        Err(Error::NothingToLearn)
    );
    let data = parse_dataset("evidence(a,true).\n\nevidence(zzz,true).").unwrap();
    assert_eq!(
        em_fit(&core("t(0.5)::a."), &data, &EmOptions::default()),
        Err(Error::ImpossibleEvidence { example: 2 })
    );
    let data = parse_dataset("evidence(a,true).\n\nevidence(a,false).\nevidence(b,true).").unwrap();
    assert_eq!(
        em_fit(&core("t(0.5)::a. b :- a."), &data, &EmOptions::default()),
        Err(Error::ImpossibleEvidence { example: 2 })
    );
    let data = parse_dataset("evidence(b,true).").unwrap();
    assert!(matches!(
        em_fit(
            &core("t(0.5)::a. ?::go. b :- a, go."),
            &data,
            &EmOptions::default()
        ),
        Err(Error::DecisionDependentEvidence { .. })
    ));
}

#[test]
fn fitted_values_render_into_program() {
    let program = parse_program(&source("archives_learn")).unwrap();
    let fit = em_fit(&archives_core(), &impact_data(), &EmOptions::default()).unwrap();
    let values = fit
        .origins
        .iter()
        .copied()
        .zip(fit.params.iter().copied())
        .collect();
    let fitted = program.with_probabilities(&values);
    assert!(fitted.learnable_statements().is_empty());
    let reparsed = parse_program(&ddtep_core::syntax::render(&fitted)).unwrap();
    assert_eq!(reparsed, fitted);
}
