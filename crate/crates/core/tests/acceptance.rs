//! Runs every acceptance criterion and prints one PASS/FAIL line each.
//! Exits nonzero when any criterion fails.

use qflab::suites::run_suite_with;

fn main() {
    // cargo passes harness flags such as --nocapture; none of them apply here
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let name = filter.as_deref().unwrap_or("all");
    let outcomes = run_suite_with(name, |o| println!("{}", o.line())).unwrap_or_else(|| {
        eprintln!("unknown suite {name}");
        std::process::exit(2);
    });
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("acceptance: {} passed, {failed} failed", outcomes.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
