//! Convergence of the total-pressure discretization for the compressible
//! case nu = 0.4, where the displacement L2 rate falls from 3 towards 2.
//!
//! Usage: `cargo run --release --example compressible_rates -- [levels]`

use std::time::Instant;

use mpet::forms::Formulation;
use mpet::verify::{convergence_study, example1_case, StudyOptions};

fn main() {
    let levels = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let case = example1_case(0.4, 1.0);
    let start = Instant::now();
    let report = convergence_study(&case, &StudyOptions::new(Formulation::TotalPressure, levels)).expect("study runs");
    print!("{}", report.to_markdown());
    println!("max relative residual {:.2e}, {:.1} s", report.max_residual(), start.elapsed().as_secs_f64());
}
