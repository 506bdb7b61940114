//! Distance between the discrete pressures and the elliptic projection of
//! the exact pressures. It converges at order 2 in H1, one order above the
//! interpolation error.
//!
//! Usage: `cargo run --release --example superconvergence -- [levels]`

use mpet::forms::Formulation;
use mpet::verify::{convergence_study, example1_case, Norm, StudyOptions};

fn main() {
    let levels = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let case = example1_case(0.49999, 1.0);
    let mut options = StudyOptions::new(Formulation::TotalPressure, levels);
    options.discretization_errors = true;
    let report = convergence_study(&case, &options).expect("study runs");
    print!("{}", report.to_markdown());
    for field in ["p1", "p2"] {
        let rates = report.rates(field, Norm::H1);
        println!("{field} H1 rates {:?}", rates.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>());
    }
}
