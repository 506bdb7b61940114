use std::sync::OnceLock;

use mpet::forms::Formulation;
use mpet::scenario::{brain_scenario, compare_formulations, run_scenario, ScenarioOutput, MMHG, TRANSMANTLE_DELTA};

fn runs() -> &'static [ScenarioOutput; 2] {
    static RUNS: OnceLock<[ScenarioOutput; 2]> = OnceLock::new();
    RUNS.get_or_init(|| {
        let spec = brain_scenario();
        [
            run_scenario(&spec, Formulation::TotalPressure, false).unwrap(),
            run_scenario(&spec, Formulation::Standard, false).unwrap(),
        ]
    })
}

fn range(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Pressure networks each network exchanges fluid with.
const NEIGHBOURS: [&[usize]; 4] = [&[3, 4], &[4], &[1, 4], &[1, 2, 3]];

#[test]
fn pressures_stay_within_their_drivers_after_the_first_cycle() {
    // Dirichlet ranges in mmHg; the capillaries have none
    let drivers: [Option<(f64, f64)>; 4] =
        [Some((3.0 - TRANSMANTLE_DELTA, 7.0 + TRANSMANTLE_DELTA)), Some((60.0, 80.0)), Some((6.0, 6.0)), None];
    for out in runs() {
        let probes = out.probes();
        let first = probes.times.iter().position(|&t| t >= 1.0 - 1e-9).unwrap();
        let labels: Vec<String> =
            probes.columns.iter().filter_map(|c| c.strip_prefix("p1@").map(str::to_string)).collect();
        let network_range = |j: usize| {
            let all: Vec<f64> =
                labels.iter().flat_map(|l| probes.column(&format!("p{j}@{l}")).unwrap()[first..].to_vec()).collect();
            let (lo, hi) = range(&all);
            (lo / MMHG, hi / MMHG)
        };
        for j in 1..=4 {
            let (mut lo, mut hi) = drivers[j - 1].unwrap_or((f64::INFINITY, f64::NEG_INFINITY));
            for &i in NEIGHBOURS[j - 1] {
                let r = network_range(i);
                lo = lo.min(r.0);
                hi = hi.max(r.1);
            }
            let (plo, phi) = network_range(j);
            let slack = 1e-6 * hi.abs();
            assert!(
                plo >= lo - slack && phi <= hi + slack,
                "{} p{j}: [{plo}, {phi}] outside [{lo}, {hi}]",
                out.formulation.label()
            );
        }
    }
}

#[test]
fn formulations_agree_on_pressures() {
    let [tp, st] = runs();
    let cmp = compare_formulations(tp.probes(), st.probes());
    assert!(!cmp.pressure_difference.is_empty());
    for (column, d) in &cmp.pressure_difference {
        assert!(*d < 0.05, "{column}: {d}");
    }
    assert_eq!(cmp.displacement_ratio.len(), 6);
    for (label, r) in &cmp.displacement_ratio {
        assert!(label == "skull" || (r.is_finite() && *r > 0.0), "{label}: {r}");
    }
    assert!(cmp.to_markdown().contains("mid"));
}

#[test]
fn boundary_probes_follow_their_dirichlet_data() {
    for out in runs() {
        let probes = out.probes();
        assert_eq!(probes.rows.len(), 241);
        let p1 = probes.column("p1@skull").unwrap();
        let p3 = probes.column("p3@skull").unwrap();
        let u = probes.column("u_mag@skull").unwrap();
        for (k, t) in probes.times.iter().enumerate() {
            let expect = MMHG * (5.0 + 2.0 * (2.0 * std::f64::consts::PI * t).sin());
            assert!((p1[k] - expect).abs() <= 1e-9 * expect, "t = {t}");
            assert!((p3[k] - 6.0 * MMHG).abs() <= 1e-9 * MMHG);
            assert_eq!(u[k], 0.0);
        }
        assert_eq!(out.skull_displacement, 0.0);
        assert!(out.run.max_residual <= 1e-10, "{}", out.run.max_residual);
    }
}

#[test]
fn every_cycle_is_summarised() {
    for out in runs() {
        let columns = out.probes().columns.len();
        assert_eq!(out.cycles.len(), 3 * columns);
        assert!(out.cycles.iter().all(|c| c.min <= c.mean && c.mean <= c.max));
        assert_eq!(out.summary_csv().lines().count(), 3 * columns + 1);
    }
}
