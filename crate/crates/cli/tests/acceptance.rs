//! Runs criteria 1–12 and prints one PASS/FAIL line for each.

use lspec_cli::accept::run_suite;

fn main() {
    let ids: Vec<usize> = (1..=12).collect();
    let results = run_suite(&ids, |r| println!("{}", r.line()));
    let passed = results.iter().filter(|r| r.pass).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
