//! Acceptance suite: one PASS/FAIL line per criterion, at full sample counts.
//! Runs without the libtest harness so the lines are never captured.

use std::process::ExitCode;

use srso3::verify::{run, Profile, CRITERIA, DEFAULT_SEED};

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for &(id, name) in CRITERIA.iter() {
        let outcome = run(id, Profile::Full, DEFAULT_SEED).expect("listed criterion");
        println!("{outcome}");
        if !outcome.passed {
            failed.push(format!("{id} {name}"));
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", CRITERIA.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
