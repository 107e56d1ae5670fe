//! Acceptance gate: every verification criterion, run end to end at its
//! stated tolerance, one pass/fail line each.
//!
//! Run with `cargo test -p filmlab --test acceptance -- --nocapture`
//! to see the table.

use filmlab::suites::{run_suite, SuiteReport};

/// Criterion catalogue: (number, suite, criterion name).
const CATALOGUE: &[(&str, &str, &str)] = &[
    ("C01a", "identities", "mass-conservation"),
    ("C01b", "criterion", "battery-mass-conservation"),
    ("C02", "identities", "energy-identity"),
    ("C03", "identities", "l2-identity"),
    ("C04", "identities", "closed-forms"),
    ("C05", "criterion", "blowup-sufficiency"),
    ("C06", "criterion", "necessity-bound"),
    ("C07", "criterion", "s-minus-consistency"),
    ("C08a", "crosscheck", "cross-solver-decay"),
    ("C08b", "crosscheck", "cross-solver-blowup"),
    ("C09", "welldepth", "well-depth"),
    ("C10", "identities", "weak-form"),
    ("C11", "criterion", "monotonicity-evidence"),
];

#[test]
fn all_acceptance_criteria_pass() {
    let out = tempfile::tempdir().unwrap();
    let mut reports: Vec<SuiteReport> = Vec::new();
    for suite in ["identities", "criterion", "crosscheck", "welldepth"] {
        reports.push(run_suite(suite, out.path()).expect("suite runs"));
    }

    let mut failures = Vec::new();
    for (number, suite, name) in CATALOGUE {
        let report = reports.iter().find(|r| r.suite == *suite).unwrap();
        let result = report
            .results
            .iter()
            .find(|r| r.name == *name)
            .unwrap_or_else(|| panic!("criterion {name} missing from suite {suite}"));
        let mark = if result.passed { "PASS" } else { "FAIL" };
        println!("{mark}  {number:<5} {name:<26} {}", result.detail);
        if !result.passed {
            failures.push(format!("{number} {name}: {}", result.detail));
        }
    }
    assert!(failures.is_empty(), "failed criteria:\n{}", failures.join("\n"));

    // catalogue must cover every criterion the suites produced
    let produced: usize = reports.iter().map(|r| r.results.len()).sum();
    assert_eq!(produced, CATALOGUE.len(), "catalogue out of sync with the suites");
}
