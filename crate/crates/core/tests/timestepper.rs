use std::sync::Arc;

use mpet::forms::Formulation;
use mpet::mesh::{build_unit_square_mesh_with, Diagonal, Point};
use mpet::scenario::{brain_scenario_with, run_scenario, Geometry, ScenarioSpec};
use mpet::timestepper::{compatible_initial_state, run, MpetState, Problem, RunOptions, RunOutput, TimeGrid};
use mpet::verify::{convergence_study, example1_case, Norm, StudyOptions};

type PointFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

fn short_brain() -> ScenarioSpec {
    let mut spec = brain_scenario_with(Geometry::Annulus { r_inner: 30.0, r_outer: 100.0, layers: 4 });
    spec.t_final = 0.25;
    spec
}

fn brain_setup(spec: &ScenarioSpec, formulation: Formulation) -> (Problem, MpetState) {
    let problem = spec.problem(formulation).unwrap();
    let p: Vec<PointFn> = spec.initial_pressures.iter().map(|&v| Arc::new(move |_: Point| v) as PointFn).collect();
    let initial = compatible_initial_state(&problem, &p, 0.0).unwrap();
    (problem, initial)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

fn brain_run(
    spec: &ScenarioSpec,
    formulation: Formulation,
    grid: &TimeGrid,
    initial: MpetState,
    refactor: bool,
) -> RunOutput {
    let (problem, _) = brain_setup(spec, formulation);
    let options = RunOptions { probes: spec.probes.clone(), refactor_each_step: refactor, ..Default::default() };
    run(&problem, grid, initial, &options, |_| {}).unwrap()
}

#[test]
fn identical_runs_are_bitwise_identical() {
    let spec = short_brain();
    for f in [Formulation::TotalPressure, Formulation::Standard] {
        let a = run_scenario(&spec, f, true).unwrap();
        let b = run_scenario(&spec, f, true).unwrap();
        assert_eq!(a.run.probes, b.run.probes);
        assert_eq!(a.run.probes.to_csv(), b.run.probes.to_csv());
        assert_eq!(a.run.energy, b.run.energy);
        assert_eq!(a.run.final_state.to_vector(), b.run.final_state.to_vector());
    }
}

#[test]
fn restart_from_midpoint_matches_straight_run() {
    let spec = short_brain();
    for f in [Formulation::TotalPressure, Formulation::Standard] {
        let (_, initial) = brain_setup(&spec, f);
        let full = brain_run(&spec, f, &spec.grid().unwrap(), initial.clone(), false);
        let half_grid = TimeGrid::new(spec.t_final / 2.0, spec.dt, spec.theta).unwrap();
        let first = brain_run(&spec, f, &half_grid, initial, false);
        assert_eq!(first.steps, 10);
        let second = brain_run(&spec, f, &spec.grid().unwrap(), first.final_state, false);
        assert_eq!(second.steps, 10);
        assert!((second.final_state.t - full.final_state.t).abs() < 1e-14);
        let d = max_diff(&second.final_state.to_vector(), &full.final_state.to_vector());
        assert!(d < 1e-12, "{}: restart differs by {d:e}", f.label());
    }
}

#[test]
fn factorize_once_matches_refactorization() {
    let spec = short_brain();
    for f in [Formulation::TotalPressure, Formulation::Standard] {
        let (_, initial) = brain_setup(&spec, f);
        let once = brain_run(&spec, f, &spec.grid().unwrap(), initial.clone(), false);
        let each = brain_run(&spec, f, &spec.grid().unwrap(), initial, true);
        let d = max_diff(&each.final_state.to_vector(), &once.final_state.to_vector());
        assert!(d < 1e-12, "{}: {d:e}", f.label());
        for (ra, rb) in once.probes.rows.iter().zip(&each.probes.rows) {
            assert!(max_diff(ra, rb) < 1e-12);
        }
    }
}

#[test]
fn probe_series_has_one_row_per_step() {
    let spec = short_brain();
    let out = run_scenario(&spec, Formulation::TotalPressure, false).unwrap();
    assert_eq!(out.run.steps, 20);
    assert_eq!(out.run.probes.rows.len(), 21);
    assert_eq!(out.run.probes.times.len(), 21);
    assert!((out.run.probes.times[20] - 0.25).abs() < 1e-14);
    assert_eq!(out.skull_displacement, 0.0);
    assert!(out.run.max_residual <= 1e-10);
}

#[test]
fn diagonal_direction_does_not_change_rates() {
    let case = example1_case(0.49999, 1.0);
    let mut right = StudyOptions::new(Formulation::TotalPressure, 3);
    right.coarse_cells = 4;
    let mut left = right.clone();
    left.diagonal = Diagonal::Left;
    let r = convergence_study(&case, &right).unwrap();
    let l = convergence_study(&case, &left).unwrap();
    assert_eq!(build_unit_square_mesh_with(4, Diagonal::Left).num_cells(), 32);
    for field in ["u", "p1", "p0"] {
        for norm in [Norm::L2, Norm::H1] {
            for (a, b) in r.rates(field, norm).iter().zip(l.rates(field, norm)) {
                assert!((a - b).abs() < 0.1, "{field} {norm:?}: {a} vs {b}");
            }
        }
    }
    assert!(r.to_markdown().contains("lower-left to upper-right"));
    assert!(l.to_markdown().contains("lower-right to upper-left"));
}
