//! Runs the property suite and prints the measured error bounds.

use monosort::harness::{run_suite, SuiteOptions};

fn main() -> monosort::Result<()> {
    let suite = run_suite(&SuiteOptions {
        trials: 30,
        ..SuiteOptions::default()
    })?;
    for m in &suite.bounds {
        println!(
            "{:<11} beta={:<9.5} sup={:.6} normalized={:.6}",
            m.kind.name(),
            m.beta,
            m.measured_sup,
            m.normalized.unwrap_or(f64::NAN)
        );
    }
    for e in &suite.entries {
        let status = match (e.report.passed, e.expected_pass) {
            (true, true) => "pass",
            (false, false) => "fail (expected)",
            _ => "UNEXPECTED",
        };
        println!("{:<45} {status}", e.report.check_name);
    }
    println!("all as expected: {}", suite.all_as_expected());
    Ok(())
}
