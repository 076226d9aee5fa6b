//! The acceptance checks as a library call; `--full` runs all of them.

use blockade_thermal::harness::validate::{corrupted_rates, validate_all, ValidateOptions};

fn main() {
    let fast = !std::env::args().any(|a| a == "--full");
    let summary = validate_all(&ValidateOptions {
        fast,
        ..Default::default()
    });
    for r in &summary.results {
        println!("{}", r.line());
    }
    let faulty = validate_all(&ValidateOptions {
        fast: true,
        rate_table: corrupted_rates,
    });
    for r in faulty.results.iter().filter(|r| !r.passed) {
        println!("with a corrupted rate table: {}", r.line());
    }
}
