//! Convergence of the total-pressure discretization on the smooth
//! manufactured solution with nu = 0.49999 and c = 1.
//!
//! Usage: `cargo run --release --example total_pressure_rates -- [levels]`

use std::time::Instant;

use mpet::forms::Formulation;
use mpet::verify::{convergence_study, example1_case, StudyOptions};

fn main() {
    let levels = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let case = example1_case(0.49999, 1.0);
    let start = Instant::now();
    let report = convergence_study(&case, &StudyOptions::new(Formulation::TotalPressure, levels)).expect("study runs");
    print!("{}", report.to_markdown());
    println!("max relative residual {:.2e}, {:.1} s", report.max_residual(), start.elapsed().as_secs_f64());
}
