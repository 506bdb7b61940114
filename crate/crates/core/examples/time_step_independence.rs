//! Final-time errors of the total-pressure discretization for three time
//! steps. The manufactured solution is linear in time, so Crank-Nicolson
//! adds no time error to it. The displacement errors agree to about 1e-9;
//! the pressure errors still carry a start-up transient that depends on dt.
//!
//! Usage: `cargo run --release --example time_step_independence -- [levels]`

use mpet::forms::Formulation;
use mpet::verify::{convergence_study, example1_case, Norm, StudyOptions};

fn main() {
    let levels = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let case = example1_case(0.49999, 1.0);
    let mut reports = Vec::new();
    for dt in [0.25, 0.125, 0.0625] {
        let mut options = StudyOptions::new(Formulation::TotalPressure, levels);
        options.dt = Some(dt);
        reports.push((dt, convergence_study(&case, &options).expect("study runs")));
    }
    let reference = &reports[1].1;
    for (dt, report) in &reports {
        println!("dt = {dt}");
        for field in &report.fields {
            for norm in [Norm::L2, Norm::H1] {
                let mut worst: f64 = 0.0;
                for (a, b) in report.errors(&field.name, norm).iter().zip(reference.errors(&field.name, norm)) {
                    worst = worst.max((a - b).abs() / b.abs());
                }
                println!(
                    "  {:<3} {norm:?}: {:.6e} (finest), largest relative difference to dt = 0.125: {worst:.2e}",
                    field.name,
                    report.errors(&field.name, norm).last().copied().unwrap_or(f64::NAN)
                );
            }
        }
    }
}
