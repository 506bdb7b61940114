//! Builds the unit-square and annulus meshes, refines them and round-trips
//! them through the text mesh format.
//!
//! Usage: `cargo run --example mesh_io -- [path]`

use mpet::mesh::{build_annulus_mesh, build_unit_square_mesh, read_mesh, write_mesh, Mesh};

fn describe(name: &str, m: &Mesh) {
    let tags = m.tags();
    println!(
        "{name:<22} {:>6} vertices {:>6} cells {:>5} boundary facets, area {:.6}, tags {tags:?}",
        m.num_vertices(),
        m.num_cells(),
        m.facets.len(),
        m.total_area()
    );
}

fn main() {
    let path =
        std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().join("annulus.mesh").display().to_string());

    let mut square = build_unit_square_mesh(4);
    for k in 0..4 {
        describe(&format!("unit square n = {}", 4 << k), &square);
        square = square.refine_uniform();
    }

    let annulus = build_annulus_mesh(30.0, 100.0, 10).expect("annulus");
    describe("annulus", &annulus);
    println!("exact annulus area {:.6}", std::f64::consts::PI * (100.0f64.powi(2) - 30.0f64.powi(2)));

    write_mesh(&annulus, &path).expect("write mesh");
    let back = read_mesh(&path).expect("read mesh");
    describe("annulus (read back)", &back);
    println!("round trip identical: {}", back == annulus);
}
