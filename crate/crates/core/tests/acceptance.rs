//! Runs every acceptance criterion at full resolution and prints one line
//! each. Built without the libtest harness so the lines always reach stdout.

use std::process::ExitCode;

use edgewall::validation::{run_with, ValidationOptions};

fn main() -> ExitCode {
    let reports = run_with(&ValidationOptions::default(), |r| println!("{r}"));
    let failed: Vec<u32> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    println!("{} of {} criteria passed", reports.len() - failed.len(), reports.len());
    if reports.len() == 11 && failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
