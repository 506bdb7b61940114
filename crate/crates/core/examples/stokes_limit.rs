//! Static displacement/total-pressure solves approach the incompressible
//! Stokes solution as lambda grows.
//!
//! Usage: `cargo run --release --example stokes_limit -- [cells_per_side]`

use std::f64::consts::PI;
use std::sync::Arc;

use mpet::forms::VectorFn;
use mpet::mesh::{build_unit_square_mesh, Point};
use mpet::spaces::{make_taylor_hood_spaces, DirichletSpec};
use mpet::verify::{difference_norms, static_solve};

fn main() {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    let spaces = make_taylor_hood_spaces(Arc::new(build_unit_square_mesh(n)), 1, &DirichletSpec::whole_boundary(1))
        .expect("spaces");
    let (v, q) = (spaces.displacement(), spaces.total_pressure_space().expect("total pressure space"));
    let f: VectorFn = Arc::new(|x: Point, _| [(PI * x[1]).sin(), x[0] * (1.0 - x[0])]);

    let (u_stokes, p_stokes, rel) = static_solve(v, q, 1.0, None, &f).expect("Stokes solve");
    println!("Stokes: relative residual {rel:.1e}");
    for lam in [1e1, 1e3, 1e5, 1e7, 1e9] {
        let (u, p0, rel) = static_solve(v, q, 1.0, Some(lam), &f).expect("static solve");
        println!(
            "lambda = {lam:>7.0e}: |u - u_S|_H1 = {:.3e}, |p0 - p_S|_L2 = {:.3e}, relative residual {rel:.1e}",
            difference_norms(&u, &u_stokes).h1,
            difference_norms(&p0, &p_stokes).l2
        );
    }
}
