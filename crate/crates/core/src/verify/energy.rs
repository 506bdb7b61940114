//! Energy monitor for runs without sources or boundary data.

use std::sync::Arc;

use crate::forms::{Formulation, SourceData};
use crate::mesh::{build_unit_square_mesh, Point};
use crate::params::MpetParameters;
use crate::spaces::{make_standard_spaces, make_taylor_hood_spaces, DirichletSpec};
use crate::timestepper::{compatible_initial_state, run, DirichletData, Problem, RunOptions, StepError, TimeGrid};

/// `sum_kl a[k][l] sin((k+1) pi x) sin((l+1) pi y)`, zero on the boundary
/// of the unit square.
#[derive(Debug, Clone, PartialEq)]
pub struct SineSeries {
    pub coefficients: Vec<Vec<f64>>,
}

impl SineSeries {
    pub fn eval(&self, x: Point) -> f64 {
        let pi = std::f64::consts::PI;
        let mut s = 0.0;
        for (k, row) in self.coefficients.iter().enumerate() {
            let sx = ((k + 1) as f64 * pi * x[0]).sin();
            for (l, a) in row.iter().enumerate() {
                s += a * sx * ((l + 1) as f64 * pi * x[1]).sin();
            }
        }
        s
    }
}

/// Energy after every step of a run on the `n x n` unit square with zero
/// sources, homogeneous Dirichlet data and the given initial pressures.
pub fn zero_data_energy(
    params: &MpetParameters,
    formulation: Formulation,
    n: usize,
    grid: &TimeGrid,
    initial: &[SineSeries],
) -> Result<Vec<(f64, f64)>, StepError> {
    let a = params.networks();
    let mesh = Arc::new(build_unit_square_mesh(n));
    let spec = DirichletSpec::whole_boundary(a);
    let spaces = match formulation {
        Formulation::TotalPressure => make_taylor_hood_spaces(mesh, a, &spec),
        Formulation::Standard => make_standard_spaces(mesh, a, &spec),
    }
    .map_err(|e| StepError::Mismatch(e.to_string()))?;
    let problem = Problem {
        spaces,
        params: params.clone(),
        sources: SourceData::zero(a),
        dirichlet: DirichletData::homogeneous(),
    };
    let initial: Vec<Arc<dyn Fn(Point) -> f64 + Send + Sync>> = initial
        .iter()
        .map(|s| {
            let s = s.clone();
            Arc::new(move |x| s.eval(x)) as _
        })
        .collect();
    let state = compatible_initial_state(&problem, &initial, 0.0)?;
    let options = RunOptions { record_energy: true, ..Default::default() };
    Ok(run(&problem, grid, state, &options, |_| {})?.energy)
}

/// Largest step-to-step increase of an energy trace (0 if it never grows).
pub fn max_energy_increase(trace: &[(f64, f64)]) -> f64 {
    trace.windows(2).map(|w| w[1].1 - w[0].1).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Conductivity;

    fn params() -> MpetParameters {
        MpetParameters {
            mu: 1.0,
            lam: 50.0,
            alpha: vec![1.0, 0.5],
            c: vec![1.0, 0.1],
            k: vec![Conductivity::Constant(1.0), Conductivity::Constant(0.1)],
            xi: vec![vec![0.0, 2.0], vec![2.0, 0.0]],
        }
    }

    #[test]
    fn sine_series_vanishes_on_the_boundary() {
        let s = SineSeries { coefficients: vec![vec![1.0, -0.5], vec![0.25, 2.0]] };
        for t in [0.0, 0.3, 0.77, 1.0] {
            for x in [[t, 0.0], [t, 1.0], [0.0, t], [1.0, t]] {
                assert!(s.eval(x).abs() < 1e-14);
            }
        }
        assert!((SineSeries { coefficients: vec![vec![1.0]] }.eval([0.5, 0.5]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn energy_decays_for_both_formulations() {
        let init = [
            SineSeries { coefficients: vec![vec![1.0, 0.3]] },
            SineSeries { coefficients: vec![vec![-0.5], vec![0.8]] },
        ];
        let grid = TimeGrid::crank_nicolson(0.5, 0.05).unwrap();
        for f in [Formulation::TotalPressure, Formulation::Standard] {
            let e = zero_data_energy(&params(), f, 4, &grid, &init).unwrap();
            assert_eq!(e.len(), 11);
            assert!(max_energy_increase(&e) <= 1e-10);
            assert!(e[10].1 < 0.5 * e[0].1);
        }
    }

    #[test]
    fn increase_of_a_trace() {
        assert_eq!(max_energy_increase(&[(0.0, 3.0), (1.0, 2.0), (2.0, 2.5), (3.0, 1.0)]), 0.5);
        assert_eq!(max_energy_increase(&[(0.0, 1.0)]), 0.0);
    }
}
