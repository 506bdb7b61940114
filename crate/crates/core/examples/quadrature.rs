//! Prints the triangle quadrature rules and checks their polynomial
//! exactness on the reference triangle.
//!
//! Usage: `cargo run --example quadrature`

use mpet::elements::quadrature;

// integral of x^a y^b over the reference triangle: a! b! / (a + b + 2)!
fn monomial_integral(a: u32, b: u32) -> f64 {
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    fact(a) * fact(b) / fact(a + b + 2)
}

fn main() {
    for degree in 1..=6 {
        let rule = quadrature(degree).expect("supported degree");
        let mut worst: f64 = 0.0;
        for a in 0..=degree as u32 {
            for b in 0..=(degree as u32 - a) {
                let q: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(p, w)| w * p[1].powi(a as i32) * p[2].powi(b as i32))
                    .sum();
                worst = worst.max((q - monomial_integral(a, b)).abs());
            }
        }
        println!(
            "degree {degree}: {:>2} points, weight sum {:.15}, min weight {:.3e}, worst monomial error {worst:.1e}",
            rule.points.len(),
            rule.weights.iter().sum::<f64>(),
            rule.weights.iter().cloned().fold(f64::INFINITY, f64::min)
        );
    }
}
