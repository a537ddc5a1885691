use std::path::PathBuf;

use socam_core::assets::{self, home_engine};
use socam_core::qoc::{parse_qoc, ParameterKind};
use socam_core::runtime::{parse_trace, render_records, EventKind, LogFormat, LogRecord};
use socam_core::{PrefixMap, Term, Triple};

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/scenario.log")
}

fn run_scenario() -> (Vec<LogRecord>, String) {
    let mut engine = home_engine(true).unwrap();
    let trace = parse_trace(assets::SCENARIO_TRC).unwrap();
    let log = engine.run_trace(&trace).unwrap();
    let mut prefixes = PrefixMap::standard();
    prefixes.extend(&trace.prefixes);
    let text = render_records(&log, LogFormat::Text, &prefixes);
    (log, text)
}

fn home(local: &str) -> Term {
    Term::iri(&format!("http://socam.example/home#{local}"))
}

/// Set `SOCAM_UPDATE_GOLDEN=1` to rewrite the expected log.
#[test]
fn scenario_matches_golden_log() {
    let (_, text) = run_scenario();
    let path = golden_path();
    if std::env::var_os("SOCAM_UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &text).unwrap();
    }
    let expected = std::fs::read_to_string(&path).expect("golden log present");
    assert_eq!(text, expected);
}

#[test]
fn scenario_is_deterministic() {
    let (_, a) = run_scenario();
    let (_, b) = run_scenario();
    assert_eq!(a, b);
}

#[test]
fn log_times_never_decrease() {
    let (log, _) = run_scenario();
    assert!(log.windows(2).all(|w| w[0].time() <= w[1].time()));
}

#[test]
fn sleeping_derived_once_and_undone_by_curtain() {
    let (log, _) = run_scenario();
    let sleeping = Triple::new(home("John"), home("personStatus"), Term::string("Sleeping"));
    let derives: Vec<_> = log
        .iter()
        .filter_map(|r| match r {
            LogRecord::Derive { time, statement, .. } if statement.triple == sleeping => Some(*time),
            _ => None,
        })
        .collect();
    let undos: Vec<_> = log
        .iter()
        .filter_map(|r| match r {
            LogRecord::UndoDerive { time, statement, .. } if statement.triple == sleeping => Some(*time),
            _ => None,
        })
        .collect();
    assert_eq!(derives, vec![4000]);
    assert_eq!(undos, vec![11000]);
}

#[test]
fn every_action_activation_precedes_its_deactivation() {
    let (log, _) = run_scenario();
    let mut active = std::collections::BTreeSet::new();
    for rec in &log {
        if let LogRecord::Action(a) = rec {
            let key = (a.service_id.clone(), format!("{:?}", a.params));
            match a.phase {
                socam_core::runtime::Phase::Activate => assert!(active.insert(key)),
                socam_core::runtime::Phase::Deactivate => assert!(active.remove(&key)),
            }
        }
    }
}

#[test]
fn location_qoc_trace_carries_resolution_and_accuracy() {
    let trace = parse_trace(assets::LOCATION_QOC_TRC).unwrap();
    assert_eq!(trace.events.len(), 1);
    let EventKind::Assert { triple, qoc, .. } = &trace.events[0].kind else { panic!("expected an assert") };
    assert_eq!(triple.object, home("Building-A"));
    let constraint = parse_qoc(qoc, true).unwrap().constraint;
    let res = constraint.get(ParameterKind::Resolution).unwrap();
    assert_eq!((res.value, res.unit.as_str()), (50.0, "meter"));
    let acc = constraint.get(ParameterKind::Accuracy).unwrap();
    assert_eq!((acc.value, acc.unit.as_str()), (79.0, "percent"));
}
