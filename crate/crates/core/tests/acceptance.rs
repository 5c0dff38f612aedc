// Runs without the libtest harness so the per-check lines always show.
use std::process::ExitCode;

use trimoments::verify::{run_all, VerifyConfig};

fn main() -> ExitCode {
    let results = run_all(&VerifyConfig::default());
    for r in &results {
        println!(
            "[{}] {:>2} {:<36} {:>7.2}s  {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.id,
            r.name,
            r.seconds,
            r.detail
        );
    }
    let failed: Vec<usize> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    if results.len() == 10 && failed.is_empty() {
        println!("acceptance: 10/10 passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing checks {failed:?} ({} run)", results.len());
        ExitCode::FAILURE
    }
}
