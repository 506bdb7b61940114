//! Three cardiac cycles of the four-network brain model on an annulus,
//! solved with both formulations.
//!
//! Usage: `cargo run --release --example brain_annulus -- [out_dir]`

use std::time::Instant;

use mpet::forms::Formulation;
use mpet::scenario::{brain_scenario, compare_formulations, periodicity, run_scenario, MMHG};

fn main() {
    let out_dir = std::env::args().nth(1);
    let spec = brain_scenario();
    let mut series = Vec::new();
    for formulation in [Formulation::TotalPressure, Formulation::Standard] {
        let start = Instant::now();
        let out = run_scenario(&spec, formulation, false).expect("scenario runs");
        println!(
            "{}: {} steps in {:.1} s, max residual {:.1e}, skull |u| {}",
            formulation.label(),
            out.run.steps,
            start.elapsed().as_secs_f64(),
            out.run.max_residual,
            out.skull_displacement
        );
        for c in out.cycles.iter().filter(|c| c.cycle == 3) {
            let scale = if c.column.starts_with('p') { MMHG } else { 1.0 };
            println!("  cycle 3 {:<26} min {:>12.5} max {:>12.5}", c.column, c.min / scale, c.max / scale);
        }
        let worst =
            periodicity(out.probes(), 2).into_iter().fold((String::new(), 0.0), |m, p| if p.1 > m.1 { p } else { m });
        println!("  largest cycle 2 vs 3 difference: {} {:.3e}", worst.0, worst.1);
        if std::env::var("VERBOSE").is_ok() {
            for p in periodicity(out.probes(), 2) {
                println!("    {} {:.3e}", p.0, p.1);
            }
        }
        if let Some(dir) = &out_dir {
            std::fs::create_dir_all(dir).expect("output directory");
            let path = format!("{dir}/probes_{}.csv", formulation.label());
            std::fs::write(&path, out.probes().to_csv()).expect("write probes");
        }
        series.push(out);
    }
    print!("{}", compare_formulations(series[0].probes(), series[1].probes()).to_markdown());
}
