//! Runs the numbered acceptance criteria and prints one status line each.

use std::io::Write;

use hopfield_core::verify::{run_criterion, VerifyOptions, CRITERIA};

#[test]
fn acceptance_criteria() {
    let opts = VerifyOptions::default();
    let mut failed = Vec::new();
    for id in CRITERIA {
        let report = run_criterion(id, &opts);
        // written past the test harness capture so the table is always visible
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, "acceptance {report}");
        if !report.passed() {
            for c in &report.checks {
                let _ = writeln!(out, "    {} {}: {:e} (limit {:e})", if c.passed { "ok  " } else { "FAIL" }, c.name, c.measured, c.limit);
            }
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
