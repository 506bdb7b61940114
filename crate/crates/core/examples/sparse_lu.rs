//! Factorizes one Crank-Nicolson step matrix of each formulation with the
//! sparse LU and reports fill, residuals and backward error.
//!
//! Usage: `cargo run --release --example sparse_lu -- [cells_per_side]`

use std::time::Instant;

use mpet::forms::{assemble_load, Formulation};
use mpet::linalg::{backward_error, DirichletElimination, SparseLu};
use mpet::verify::{example1_case, manufactured_problem};

fn main() {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(16);
    let case = example1_case(0.49999, 1.0);
    for formulation in [Formulation::TotalPressure, Formulation::Standard] {
        let problem = manufactured_problem(&case, formulation, n).expect("problem");
        let op = problem.operator(case.dt, 0.5).expect("operator");
        let elim = DirichletElimination::new(&op.lhs, &problem.constrained_dofs());
        let load = assemble_load(&problem.spaces, &case.sources, case.dt).expect("load");
        let zero = vec![0.0; load.len()];
        let mut b = op.rhs(&load, &zero, &zero);
        elim.apply(&mut b, &zero);

        let start = Instant::now();
        let lu = SparseLu::new(&elim.matrix).expect("nonsingular");
        let factor_time = start.elapsed().as_secs_f64();
        let (x, rel) = lu.solve_refined(&elim.matrix, &b);
        println!(
            "{:<15} n = {n}: {} dofs, nnz(A) = {}, nnz(L+U) = {}, factor {:.2} s, relative residual {rel:.2e}, backward error {:.1e}, symmetry defect {:.1e}",
            formulation.label(),
            elim.matrix.nrows,
            elim.matrix.nnz(),
            lu.fill(),
            factor_time,
            backward_error(&elim.matrix, &x, &b),
            elim.matrix.symmetry_defect()
        );
    }
}
