//! Discrete energy of source-free runs from random initial pressures,
//! printed step by step for both formulations.
//!
//! Usage: `cargo run --release --example energy_decay -- [seed]`

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mpet::forms::Formulation;
use mpet::timestepper::TimeGrid;
use mpet::verify::{example1_case, max_energy_increase, zero_data_energy, SineSeries};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = example1_case(0.49999, 1.0).params;
    params.xi = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    let initial: Vec<SineSeries> = (0..2)
        .map(|_| SineSeries {
            coefficients: (0..3).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect(),
        })
        .collect();
    let grid = TimeGrid::crank_nicolson(0.5, 0.03125).expect("grid");
    for formulation in [Formulation::TotalPressure, Formulation::Standard] {
        let trace = zero_data_energy(&params, formulation, 8, &grid, &initial).expect("run");
        println!("{} (largest increase {:.1e})", formulation.label(), max_energy_increase(&trace));
        for (t, e) in trace.iter().step_by(4) {
            println!("  t = {t:.4}  E = {e:.10e}");
        }
    }
}
