//! Acceptance checks: one PASS/FAIL line per criterion, with the measured
//! values underneath. Failures are reported, not hidden; set
//! `ACCEPTANCE_STRICT=1` to turn any FAIL into a nonzero exit status.

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mpet::app::{manufactured_case, oracle_gate, ORACLE_TOL};
use mpet::config::parse_config;
use mpet::forms::{Formulation, VectorFn};
use mpet::mesh::build_unit_square_mesh;
use mpet::scenario::{brain_scenario, compare_formulations, periodicity, run_scenario, MMHG};
use mpet::spaces::{make_taylor_hood_spaces, DirichletSpec};
use mpet::timestepper::TimeGrid;
use mpet::verify::{
    convergence_study, difference_norms, example1_case, example1_with_params, max_energy_increase, static_solve,
    zero_data_energy, ConvergenceReport, ManufacturedCase, Norm, SineSeries, StudyOptions,
};

const LEVELS: usize = 5;

/// Published total-pressure errors, coarse to fine, for nu = 0.49999, c = 1.
const REFERENCE: [(&str, Norm, [f64; 5]); 5] = [
    ("u", Norm::L2, [3.13e-2, 3.64e-3, 4.35e-4, 5.36e-5, 6.67e-6]),
    ("u", Norm::H1, [7.28e-1, 1.98e-1, 5.06e-2, 1.27e-2, 3.19e-3]),
    ("p1", Norm::L2, [3.69e-2, 9.57e-3, 2.47e-3, 6.21e-4, 1.55e-4]),
    ("p1", Norm::H1, [4.21e-1, 2.16e-1, 1.09e-1, 5.45e-2, 2.73e-2]),
    ("p0", Norm::L2, [1.42e-1, 3.10e-2, 7.56e-3, 1.88e-3, 4.70e-4]),
];

/// Displacement L2 rates for nu = 0.4.
const COMPRESSIBLE_U_L2_RATES: [f64; 4] = [3.02, 2.82, 2.47, 2.18];

struct Outcome {
    pass: bool,
    title: &'static str,
    details: Vec<String>,
}

impl Outcome {
    fn new(title: &'static str) -> Self {
        Outcome { pass: true, title, details: Vec::new() }
    }

    /// Records one sub-check.
    fn check(&mut self, ok: bool, detail: String) {
        self.pass &= ok;
        self.details.push(format!("{} {detail}", if ok { "ok  " } else { "FAIL" }));
    }

    fn note(&mut self, detail: String) {
        self.details.push(format!("     {detail}"));
    }
}

fn fmt_rates(r: &[f64]) -> String {
    r.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ")
}

fn study(case: &ManufacturedCase, formulation: Formulation, f: impl FnOnce(&mut StudyOptions)) -> ConvergenceReport {
    let mut options = StudyOptions::new(formulation, LEVELS);
    f(&mut options);
    convergence_study(case, &options).unwrap_or_else(|e| panic!("{}: {e}", case.name))
}

fn all_rates(r: &ConvergenceReport) -> Vec<(String, Vec<f64>)> {
    let mut out = Vec::new();
    for field in &r.fields {
        out.push((format!("{} L2", field.name), r.rates(&field.name, Norm::L2)));
        if field.show_h1 {
            out.push((format!("{} H1", field.name), r.rates(&field.name, Norm::H1)));
        }
    }
    out
}

fn max_rate_change(a: &ConvergenceReport, b: &ConvergenceReport) -> (f64, String) {
    let mut worst = (0.0, String::new());
    for ((name, ra), (_, rb)) in all_rates(a).iter().zip(all_rates(b)) {
        for (k, (x, y)) in ra.iter().zip(&rb).enumerate() {
            if (x - y).abs() > worst.0 {
                worst = ((x - y).abs(), format!("{name} pair {}", k + 1));
            }
        }
    }
    worst
}

fn oracle_criterion(cases: &[ManufacturedCase]) -> Outcome {
    let mut o = Outcome::new("source oracle gate on every shipped manufactured case");
    for case in cases {
        match oracle_gate(case) {
            Ok(r) => o.check(r < ORACLE_TOL, format!("{}: residual {r:.2e} < {ORACLE_TOL:e}", case.name)),
            Err(e) => o.check(false, e.to_string()),
        }
    }
    o
}

fn standard_locking(case: &ManufacturedCase) -> Outcome {
    let mut o = Outcome::new("standard formulation shows locked rates at nu = 0.49999");
    let start = Instant::now();
    let r = study(case, Formulation::Standard, |_| {});
    let secs = start.elapsed().as_secs_f64();
    let h1 = r.rates("u", Norm::H1);
    let l2 = r.rates("u", Norm::L2);
    o.check(h1.iter().all(|x| (0.9..=1.2).contains(x)), format!("u H1 rates [{}] in [0.9, 1.2]", fmt_rates(&h1)));
    o.check(l2.iter().all(|x| (1.9..=2.2).contains(x)), format!("u L2 rates [{}] in [1.9, 2.2]", fmt_rates(&l2)));
    o.check(secs < 300.0, format!("runtime {secs:.1} s < 300 s"));
    let res: Vec<String> = r.levels.iter().map(|l| format!("{:.1e}", l.max_residual)).collect();
    o.note(format!(
        "normwise solver residuals per level [{}]; above 1e-10 on fine meshes (double-precision floor, backward error ~1e-16)",
        res.join(", ")
    ));
    o
}

fn total_pressure_reference(r: &ConvergenceReport) -> Outcome {
    let mut o = Outcome::new("total-pressure errors and rates match the published values");
    let last = |f: &str, n: Norm| *r.rates(f, n).last().expect("rates");
    for (field, norm, target, tol) in [
        ("u", Norm::L2, 3.0, 0.15),
        ("u", Norm::H1, 2.0, 0.1),
        ("p1", Norm::L2, 2.0, 0.1),
        ("p1", Norm::H1, 1.0, 0.05),
        ("p0", Norm::L2, 2.0, 0.1),
    ] {
        let x = last(field, norm);
        o.check((x - target).abs() <= tol, format!("final {field} {norm:?} rate {x:.3} = {target} +- {tol}"));
    }
    let mut worst = (0.0, String::new());
    for (field, norm, values) in REFERENCE {
        for (k, (e, refv)) in r.errors(field, norm).iter().zip(values).enumerate() {
            let rel = (e - refv).abs() / refv;
            if rel > worst.0 {
                worst = (rel, format!("{field} {norm:?} level {k}: {e:.3e} vs {refv:.2e}"));
            }
        }
    }
    o.check(
        worst.0 <= 0.05,
        format!("largest relative deviation from the published errors {:.2}% ({})", 100.0 * worst.0, worst.1),
    );
    o.note(format!("max solver residual {:.1e}", r.max_residual()));
    o
}

fn compressible(case: &ManufacturedCase) -> Outcome {
    let mut o = Outcome::new("displacement L2 rate decays towards 2 for nu = 0.4");
    let r = study(case, Formulation::TotalPressure, |_| {});
    let l2 = r.rates("u", Norm::L2);
    o.check(l2.windows(2).all(|w| w[1] < w[0]), format!("u L2 rates [{}] decreasing", fmt_rates(&l2)));
    for (k, (x, target)) in l2.iter().zip(COMPRESSIBLE_U_L2_RATES).enumerate() {
        o.check((x - target).abs() <= 0.2, format!("pair {}: {x:.3} = {target} +- 0.2", k + 1));
    }
    let h1 = *r.rates("u", Norm::H1).last().expect("rates");
    o.check((h1 - 2.0).abs() <= 0.1, format!("final u H1 rate {h1:.3} = 2 +- 0.1"));
    o
}

fn no_storage(case: &ManufacturedCase, reference: &ConvergenceReport) -> Outcome {
    let mut o = Outcome::new("vanishing storage keeps every rate");
    let r = study(case, Formulation::TotalPressure, |_| {});
    let (d, at) = max_rate_change(&r, reference);
    o.check(d < 0.05, format!("largest rate change vs c = 1: {d:.4} ({at}) < 0.05"));
    o.note(format!("u L2 rates [{}]", fmt_rates(&r.rates("u", Norm::L2))));
    o
}

fn superconvergence(case: &ManufacturedCase) -> Outcome {
    let mut o = Outcome::new("discretization error of p1 superconverges in H1");
    let r = study(case, Formulation::TotalPressure, |opt| opt.discretization_errors = true);
    let rates = r.rates("p1", Norm::H1);
    for x in &rates[rates.len() - 2..] {
        o.check((x - 2.0).abs() <= 0.1, format!("finest-pair H1 rate {x:.3} = 2 +- 0.1"));
    }
    o.note(format!("all p1 H1 rates [{}]", fmt_rates(&rates)));
    o
}

fn time_step_independence(case: &ManufacturedCase, reference: &ConvergenceReport) -> Outcome {
    let mut o = Outcome::new("errors independent of the time step");
    for dt in [0.25, 0.0625] {
        let r = study(case, Formulation::TotalPressure, |opt| opt.dt = Some(dt));
        let mut worst = (0.0, String::new());
        let mut per_field = Vec::new();
        for field in &r.fields {
            for norm in [Norm::L2, Norm::H1] {
                let mut fw: f64 = 0.0;
                for (k, (a, b)) in
                    r.errors(&field.name, norm).iter().zip(reference.errors(&field.name, norm)).enumerate()
                {
                    let rel = (a - b).abs() / b;
                    fw = fw.max(rel);
                    if rel > worst.0 {
                        worst = (rel, format!("{} {norm:?} level {k}", field.name));
                    }
                }
                per_field.push(format!("{} {norm:?} {fw:.1e}", field.name));
            }
        }
        o.check(
            worst.0 <= 1e-8,
            format!("dt = {dt} vs 0.125: largest relative difference {:.2e} ({}) <= 1e-8", worst.0, worst.1),
        );
        o.note(format!("dt = {dt} per field: {}", per_field.join(", ")));
    }
    o
}

fn lambda_robustness(case: &ManufacturedCase, reference: &ConvergenceReport) -> Outcome {
    let mut o = Outcome::new("lambda x 1e3 leaves rates and residuals unchanged");
    let r = study(case, Formulation::TotalPressure, |_| {});
    let (d, at) = max_rate_change(&r, reference);
    o.check(d < 0.05, format!("largest rate change {d:.4} ({at}) < 0.05"));
    o.check(r.max_residual() <= 1e-10, format!("max solver residual {:.1e} <= 1e-10", r.max_residual()));
    o
}

fn stokes_limit(case: &ManufacturedCase) -> Outcome {
    let mut o = Outcome::new("static solves converge monotonically to the Stokes solution");
    let spaces = make_taylor_hood_spaces(Arc::new(build_unit_square_mesh(16)), 1, &DirichletSpec::whole_boundary(1))
        .expect("spaces");
    let (v, q) = (spaces.displacement(), spaces.total_pressure_space().expect("p0 space"));
    let body = case.sources.f.clone().expect("body force");
    let f: VectorFn = Arc::new(move |x, _| body(x, case_t_final()));
    let (us, _, rel) = static_solve(v, q, case.params.mu, None, &f).expect("Stokes solve");
    o.note(format!("Stokes residual {rel:.1e}"));
    let mut last = f64::INFINITY;
    let mut dists = Vec::new();
    for lam in [1e3, 1e5, 1e7] {
        let (u, _, _) = static_solve(v, q, case.params.mu, Some(lam), &f).expect("static solve");
        let d = difference_norms(&u, &us).h1;
        dists.push(format!("{lam:.0e}: {d:.3e}"));
        o.check(d < last, format!("lambda {lam:.0e}: |u - u_Stokes|_H1 = {d:.3e} below the previous"));
        last = d;
    }
    o
}

fn case_t_final() -> f64 {
    0.5
}

fn energy_dissipation() -> Outcome {
    let mut o = Outcome::new("energy never increases without data");
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut params = example1_case(0.49999, 1.0).params;
    params.xi = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    let grid = TimeGrid::crank_nicolson(0.5, 0.0625).expect("grid");
    for formulation in [Formulation::TotalPressure, Formulation::Standard] {
        let mut worst: f64 = 0.0;
        for _ in 0..4 {
            let init: Vec<SineSeries> = (0..2)
                .map(|_| SineSeries {
                    coefficients: (0..3).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect(),
                })
                .collect();
            let trace = zero_data_energy(&params, formulation, 8, &grid, &init).expect("run");
            worst = worst.max(max_energy_increase(&trace));
        }
        o.check(
            worst <= 1e-10,
            format!("{}: largest increase over 4 random starts {worst:.1e} <= 1e-10", formulation.label()),
        );
    }
    o
}

fn brain() -> Outcome {
    let mut o = Outcome::new("brain scenario properties");
    let spec = brain_scenario();
    let start = Instant::now();
    let outs: Vec<_> = [Formulation::TotalPressure, Formulation::Standard]
        .into_iter()
        .map(|f| run_scenario(&spec, f, false).unwrap_or_else(|e| panic!("{}: {e}", f.label())))
        .collect();
    let secs = start.elapsed().as_secs_f64();
    for out in &outs {
        let label = out.formulation.label();
        o.check(
            out.run.steps == 240 && out.probes().rows.len() == 241,
            format!("{label}: {} steps completed", out.run.steps),
        );
        for probe in ["skull_adjacent", "ventricle_adjacent"] {
            let p3 = out.probes().column(&format!("p3@{probe}")).expect("p3 column");
            let dev = p3.iter().map(|p| (p / (6.0 * MMHG) - 1.0).abs()).fold(0.0, f64::max);
            o.check(dev <= 1e-3, format!("{label}: p3@{probe} within {:.3}% of 6 mmHg (limit 0.1%)", 100.0 * dev));
        }
        let per = periodicity(out.probes(), 2);
        let (worst, col) = per.iter().fold((0.0, ""), |m, (c, d)| if *d > m.0 { (*d, c.as_str()) } else { m });
        o.check(worst < 0.05, format!("{label}: cycle 2 vs 3 largest relative difference {worst:.3e} ({col}) < 5%"));
        let skull = out.probes().column("u_mag@skull").expect("skull column");
        o.check(
            out.skull_displacement == 0.0 && skull.iter().all(|&u| u == 0.0),
            format!("{label}: skull displacement {} (exactly zero required)", out.skull_displacement),
        );
    }
    let cmp = compare_formulations(outs[0].probes(), outs[1].probes());
    let md = cmp.to_markdown();
    o.check(
        !cmp.displacement_ratio.is_empty() && !md.is_empty(),
        "comparative displacement report emitted".to_string(),
    );
    let ratios: Vec<String> = cmp.displacement_ratio.iter().map(|(l, r)| format!("{l} {r:.3}")).collect();
    o.note(format!("displacement ratio total-pressure / standard: {}", ratios.join(", ")));
    o.check(secs < 180.0, format!("runtime {secs:.1} s < 180 s"));
    o
}

fn main() {
    let start = Instant::now();
    let case = |text: &str| manufactured_case(&parse_config(text).expect("valid config"));
    let table_std = case("case = table1");
    let table_tp = case("case = table2");
    let nu04 = case("case = table3-nu04");
    let c0 = case("case = table4-c0");
    let superconv = case("case = table5-superconv");
    let mut stiff_params = table_tp.params.clone();
    stiff_params.lam *= 1e3;
    let stiff = example1_with_params("example1 (lambda x 1e3)".into(), stiff_params);

    let mut outcomes: Vec<(usize, Outcome)> = Vec::new();
    let gate = oracle_criterion(&[
        table_std.clone(),
        table_tp.clone(),
        nu04.clone(),
        c0.clone(),
        superconv.clone(),
        stiff.clone(),
    ]);
    let gate_ok = gate.pass;
    if gate_ok {
        outcomes.push((1, standard_locking(&table_std)));
        let reference = study(&table_tp, Formulation::TotalPressure, |_| {});
        outcomes.push((2, total_pressure_reference(&reference)));
        outcomes.push((3, compressible(&nu04)));
        outcomes.push((4, no_storage(&c0, &reference)));
        outcomes.push((5, superconvergence(&superconv)));
        outcomes.push((6, time_step_independence(&table_tp, &reference)));
        outcomes.push((7, lambda_robustness(&stiff, &reference)));
    } else {
        for (id, title) in [
            (1, "standard formulation shows locked rates at nu = 0.49999"),
            (2, "total-pressure errors and rates match the published values"),
            (3, "displacement L2 rate decays towards 2 for nu = 0.4"),
            (4, "vanishing storage keeps every rate"),
            (5, "discretization error of p1 superconverges in H1"),
            (6, "errors independent of the time step"),
            (7, "lambda x 1e3 leaves rates and residuals unchanged"),
        ] {
            let mut o = Outcome::new(title);
            o.check(false, "not run: the source oracle gate failed".into());
            outcomes.push((id, o));
        }
    }
    outcomes.push((8, stokes_limit(&table_tp)));
    outcomes.push((9, energy_dissipation()));
    outcomes.push((10, gate));
    outcomes.push((11, brain()));
    outcomes.sort_by_key(|(id, _)| *id);

    let mut passed = 0;
    for (id, o) in &outcomes {
        println!("{} {id:>2} {}", if o.pass { "PASS" } else { "FAIL" }, o.title);
        for d in &o.details {
            println!("        {d}");
        }
        passed += usize::from(o.pass);
    }
    println!("{passed}/{} criteria passed in {:.0} s", outcomes.len(), start.elapsed().as_secs_f64());
    if passed < outcomes.len() && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
