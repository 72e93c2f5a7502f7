//! Full acceptance run: every criterion at the standard budget of 100 000 draws
//! per distribution check. One line per criterion; nonzero exit if any fails.
//! `DGSLAB_ACCEPTANCE_SAMPLES` overrides the budget for quick local runs.

use std::process::ExitCode;
use std::time::Instant;

use dgslab::suites::{run_suite, Suite, SuiteConfig};

const SEED: u64 = 20_240_601;
const SAMPLES: u64 = 100_000;

fn main() -> ExitCode {
    let samples = std::env::var("DGSLAB_ACCEPTANCE_SAMPLES").ok().and_then(|s| s.parse().ok()).unwrap_or(SAMPLES);
    let cfg = SuiteConfig::new(SEED, samples);
    println!("acceptance: seed {SEED}, {samples} samples per distribution check");
    let start = Instant::now();
    let report = match run_suite(Suite::All, &cfg, |c| println!("{}", c.summary_line())) {
        Ok(r) => r,
        Err(e) => {
            println!("acceptance: aborted: {e}");
            return ExitCode::FAILURE;
        }
    };
    let failed = report.criteria.iter().filter(|c| !c.pass).count();
    println!(
        "acceptance: {} of {} criteria pass ({:.0}s, {} oracle calls audited)",
        report.criteria.len() - failed,
        report.criteria.len(),
        start.elapsed().as_secs_f64(),
        report.audit.oracle_calls
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
