//! Acceptance suite. Prints one PASS/FAIL line per criterion and requires
//! that exactly the documented known failures fail. Runs without the test
//! harness so the report is never captured.

use lagrange_core::monodromy::IntegratorOptions;
use lagrange_scan::verify::{all_ids, run, CriterionReport, VerifyOptions, CRITERIA};

/// Criteria that fail for reasons recorded in the decisions log.
///
/// 12: the last clause asks for `beta_k(0.9) < beta_k(0.1)`. The computed
/// boundary is 1.4265 at e = 0.9 against 1.0201 at e = 0.1, identical at
/// N = 64 and N = 128 and confirmed by the monodromy classification, so the
/// trend only sets in much closer to e = 1.
const KNOWN_FAILURES: &[u32] = &[12];

fn line(r: &CriterionReport) -> String {
    let tol = r.tol.map_or(String::new(), |t| format!(" (tol {t:e})"));
    format!(
        "criterion {:>2} {} {}: got {}; expected {}{tol}",
        r.id,
        if r.pass { "PASS" } else { "FAIL" },
        r.name,
        r.got,
        r.expected
    )
}

fn acceptance_suite() {
    let opts = VerifyOptions::default();
    let reports: Vec<CriterionReport> = all_ids()
        .into_iter()
        .map(|id| {
            let r = run(id, &opts);
            println!("{}", line(&r));
            r
        })
        .collect();
    assert_eq!(reports.len(), CRITERIA.len());
    let failed: Vec<u32> = reports.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    let passed = reports.len() - failed.len();
    println!("{passed}/{} criteria pass; known failures {KNOWN_FAILURES:?}", reports.len());
    assert_eq!(failed, KNOWN_FAILURES, "failing criteria differ from the documented set");
}

/// A loose integrator must be caught by the oracle-based checks.
fn loose_integrator_is_detected() {
    let opts = VerifyOptions {
        integrator: IntegratorOptions {
            rel_tol: 1e-3,
            abs_tol: 1e-3,
            ..Default::default()
        },
        ..Default::default()
    };
    for id in [1, 2] {
        let r = run(id, &opts);
        println!("negative control: {}", line(&r));
        assert!(!r.pass, "criterion {id} passed with rel_tol 1e-3");
    }
}

fn main() {
    acceptance_suite();
    loose_integrator_is_detected();
    println!("acceptance suite ok");
}
