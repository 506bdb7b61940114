//! Runs a resolved [`RunConfig`] and writes its reports.

use std::fmt::Write as _;
use std::path::PathBuf;

use thiserror::Error;

use crate::config::{Case, ConfigError, Mode, RunConfig};
use crate::mesh::Point;
use crate::params::lame_from_e_nu;
use crate::scenario::{brain_scenario, compare_formulations, periodicity, run_scenario, ScenarioOutput};
use crate::timestepper::StepError;
use crate::verify::{
    convergence_study, example1_case, example1_with_params, manufactured_problem, residual_oracle, single_solve,
    ConvergenceReport, ManufacturedCase, StudyOptions,
};

/// Largest accepted source residual before any convergence run.
pub const ORACLE_TOL: f64 = 1e-5;
pub const ORACLE_SAMPLES: usize = 50;

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("source oracle rejected {case}: residual {residual:.3e} exceeds {ORACLE_TOL:e}")]
    Oracle { case: String, residual: f64 },
    #[error(transparent)]
    Step(#[from] StepError),
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// What a run printed and wrote.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AppSummary {
    pub stdout: String,
    pub files: Vec<PathBuf>,
}

impl AppSummary {
    fn write(&mut self, path: PathBuf, contents: &str) -> Result<(), AppError> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|source| AppError::Io { path: dir.to_path_buf(), source })?;
        }
        std::fs::write(&path, contents).map_err(|source| AppError::Io { path: path.clone(), source })?;
        self.files.push(path);
        Ok(())
    }
}

/// The manufactured case a config describes.
pub fn manufactured_case(config: &RunConfig) -> ManufacturedCase {
    let mut case = example1_case(config.nu, config.storage);
    if let Some(lam) = config.lambda {
        let mut params = case.params.clone();
        params.lam = lam;
        case = example1_with_params(format!("example1(nu={}, lambda={lam}, c={})", config.nu, config.storage), params);
    }
    case.name = format!("{} {}", config.case, case.name);
    case.t_final = config.t_final;
    case.dt = config.dt;
    case
}

/// Deterministic interior space-time samples (Halton sequence).
pub fn oracle_samples(n: usize, t_final: f64) -> Vec<(Point, f64)> {
    let halton = |mut i: usize, base: usize| {
        let (mut f, mut r) = (1.0, 0.0);
        while i > 0 {
            f /= base as f64;
            r += f * (i % base) as f64;
            i /= base;
        }
        r
    };
    (1..=n).map(|i| ([0.01 + 0.98 * halton(i, 2), 0.01 + 0.98 * halton(i, 3)], t_final * halton(i, 5))).collect()
}

/// Rejects a case whose sources do not satisfy the equations.
pub fn oracle_gate(case: &ManufacturedCase) -> Result<f64, AppError> {
    let residual = residual_oracle(case, &oracle_samples(ORACLE_SAMPLES, case.t_final));
    if residual < ORACLE_TOL {
        Ok(residual)
    } else {
        Err(AppError::Oracle { case: case.name.clone(), residual })
    }
}

pub fn execute(config: &RunConfig) -> Result<AppSummary, AppError> {
    match config.mode {
        Mode::Convergence | Mode::SingleSolve => run_manufactured(config),
        Mode::Scenario => run_brain(config),
    }
}

fn with_formulation_column(csv: &str, label: &str, header: bool) -> String {
    let mut out = String::new();
    for (i, line) in csv.lines().enumerate() {
        if i == 0 {
            if header {
                let _ = writeln!(out, "formulation,{line}");
            }
        } else {
            let _ = writeln!(out, "{label},{line}");
        }
    }
    out
}

fn run_manufactured(config: &RunConfig) -> Result<AppSummary, AppError> {
    let case = manufactured_case(config);
    oracle_gate(&case)?;
    let mut summary = AppSummary::default();
    let (mut csv, mut md, mut energy) = (String::new(), String::new(), String::from("formulation,level,t,energy\n"));
    for (k, formulation) in config.formulation.list().into_iter().enumerate() {
        let mut options = StudyOptions::new(formulation, config.levels);
        options.theta = config.theta;
        options.discretization_errors = config.case == Case::Table5Superconv;
        options.record_energy = config.emit_energy_trace;
        let report: ConvergenceReport = match config.mode {
            Mode::SingleSolve => single_solve(&case, &options, config.levels - 1)?,
            _ => convergence_study(&case, &options)?,
        };
        csv.push_str(&with_formulation_column(&report.to_csv(), formulation.label(), k == 0));
        md.push_str(&report.to_markdown());
        for l in &report.levels {
            for (t, e) in &l.energy {
                let _ = writeln!(energy, "{},{},{t},{e:e}", formulation.label(), l.label);
            }
        }
        if config.emit_matrices {
            let n = options.coarse_cells << if config.mode == Mode::SingleSolve { config.levels - 1 } else { 0 };
            let problem = manufactured_problem(&case, formulation, n)?;
            let op = problem.operator(case.dt, config.theta).map_err(StepError::from)?;
            let dir = config.out.join("matrices");
            summary.write(dir.join(format!("{}_step.mtx", formulation.label())), &op.lhs.to_matrix_market())?;
            summary.write(dir.join(format!("{}_history.mtx", formulation.label())), &op.history.to_matrix_market())?;
        }
    }
    summary.write(config.out.join("report.csv"), &csv)?;
    summary.write(config.out.join("report.md"), &md)?;
    if config.emit_energy_trace {
        summary.write(config.out.join("energy.csv"), &energy)?;
    }
    summary.stdout = md;
    Ok(summary)
}

fn scenario_markdown(outputs: &[ScenarioOutput]) -> String {
    let mut s = String::from("# brain scenario\n\n");
    for out in outputs {
        let _ = writeln!(
            s,
            "## {}\n\nsteps: {}, max relative residual: {:.2e}, max skull displacement: {:e}\n",
            out.formulation.label(),
            out.run.steps,
            out.run.max_residual,
            out.skull_displacement
        );
        s.push_str("| column | cycle | min | max | mean |\n|---|---|---|---|---|\n");
        for c in &out.cycles {
            let _ = writeln!(s, "| {} | {} | {:.6e} | {:.6e} | {:.6e} |", c.column, c.cycle, c.min, c.max, c.mean);
        }
        if out.cycles.iter().any(|c| c.cycle >= 3) {
            s.push_str("\n| column | cycle 2 vs 3 relative difference |\n|---|---|\n");
            for (name, d) in periodicity(out.probes(), 2) {
                let _ = writeln!(s, "| {name} | {d:.3e} |");
            }
        }
        s.push('\n');
    }
    if outputs.len() == 2 {
        s.push_str("## formulation comparison\n\n");
        s.push_str(&compare_formulations(outputs[0].probes(), outputs[1].probes()).to_markdown());
    }
    s
}

fn run_brain(config: &RunConfig) -> Result<AppSummary, AppError> {
    let mut spec = brain_scenario();
    spec.dt = config.dt;
    spec.t_final = config.t_final;
    spec.theta = config.theta;
    let (mu, lam) = lame_from_e_nu(1500.0, config.nu)
        .map_err(|e| ConfigError::Invalid { key: "nu".into(), reason: e.to_string() })?;
    spec.params.mu = mu;
    spec.params.lam = config.lambda.unwrap_or(lam);
    let mut summary = AppSummary::default();
    let mut outputs = Vec::new();
    let mut energy = String::from("formulation,t,energy\n");
    let mut csv = String::new();
    for (k, formulation) in config.formulation.list().into_iter().enumerate() {
        let out = run_scenario(&spec, formulation, config.emit_energy_trace)?;
        let probes = out.probes().to_csv();
        if k == 0 {
            summary.write(config.out.join("probes.csv"), &probes)?;
        }
        if config.formulation.list().len() > 1 {
            summary.write(config.out.join(format!("probes_{}.csv", formulation.label())), &probes)?;
        }
        let table = out.summary_csv();
        csv.push_str(if k == 0 { &table } else { table.split_once('\n').map_or("", |x| x.1) });
        for (t, e) in &out.run.energy {
            let _ = writeln!(energy, "{},{t},{e:e}", formulation.label());
        }
        if config.emit_matrices {
            let op = spec.problem(formulation)?.operator(spec.dt, spec.theta).map_err(StepError::from)?;
            summary.write(
                config.out.join("matrices").join(format!("{}_step.mtx", formulation.label())),
                &op.lhs.to_matrix_market(),
            )?;
        }
        outputs.push(out);
    }
    let md = scenario_markdown(&outputs);
    summary.write(config.out.join("report.csv"), &csv)?;
    summary.write(config.out.join("report.md"), &md)?;
    if config.emit_energy_trace {
        summary.write(config.out.join("energy.csv"), &energy)?;
    }
    summary.stdout = md;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn oracle_samples_are_interior_and_deterministic() {
        let s = oracle_samples(50, 0.5);
        assert_eq!(s.len(), 50);
        assert!(s.iter().all(|(x, t)| x[0] > 0.0 && x[0] < 1.0 && x[1] > 0.0 && x[1] < 1.0 && (0.0..=0.5).contains(t)));
        assert_eq!(s, oracle_samples(50, 0.5));
    }

    #[test]
    fn every_manufactured_case_passes_the_gate() {
        for case in ["table1", "table2", "table3-nu04", "table4-c0", "table5-superconv"] {
            let c = parse_config(&format!("case = {case}")).unwrap();
            assert!(oracle_gate(&manufactured_case(&c)).unwrap() < ORACLE_TOL);
        }
    }

    #[test]
    fn lambda_override_keeps_exact_solution_consistent() {
        let c = parse_config("case = table2\n[physics]\nlambda = 1e7\n").unwrap();
        let case = manufactured_case(&c);
        assert_eq!(case.params.lam, 1e7);
        oracle_gate(&case).unwrap();
    }
}
