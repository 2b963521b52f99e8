//! The full acceptance suite as an integration test: every criterion runs
//! over the fixed corpus and reports one pass/fail line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use distgraph::acceptance::{run_all, CRITERION_NAMES};

#[test]
fn acceptance_suite() {
    let outcome = run_all(None, None).expect("acceptance suite must run to completion");

    let mut failed = Vec::new();
    for c in &outcome.criteria {
        println!(
            "criterion {} ({}): {}: {} checks, {} vacuous, {} violations",
            c.number,
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.checks,
            c.vacuous,
            c.violations
        );
        if !c.passed {
            failed.push(c.number);
        }
    }

    assert_eq!(outcome.criteria.len(), CRITERION_NAMES.len());
    if let Some(v) = outcome.first_violation() {
        panic!("criteria {failed:?} failed; first violated check: {v:#?}");
    }
    assert!(outcome.passed());

    // every record key is unique and the stream is sorted
    assert!(outcome.records.windows(2).all(|w| w[0].key < w[1].key));
}
