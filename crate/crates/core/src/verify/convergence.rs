//! Refinement studies on the unit square and their reports.

use std::fmt::Write;
use std::sync::Arc;

use crate::forms::Formulation;
use crate::mesh::{build_unit_square_mesh, build_unit_square_mesh_with, Diagonal, Mesh, Point};
use crate::spaces::{make_standard_spaces, make_taylor_hood_spaces, DirichletSpec, FieldSpaces};
use crate::timestepper::{compatible_initial_state, run, DirichletData, Problem, RunOptions, StepError, TimeGrid};

use super::manufactured::ManufacturedCase;
use super::norms::{difference_norms, error_norms, scalar_error_norms, ErrorNorms};
use super::projection::elliptic_projection;

/// Cells per side of the coarsest mesh `H`.
pub const COARSE_CELLS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOptions {
    pub formulation: Formulation,
    /// Number of meshes `H, H/2, ...`; at least 2.
    pub levels: usize,
    pub coarse_cells: usize,
    /// Overrides the case's time step.
    pub dt: Option<f64>,
    pub theta: f64,
    /// Measure `‖Π p_j(T) − p_{j,h}(T)‖` (elliptic projection) instead of
    /// the errors against the exact fields.
    pub discretization_errors: bool,
    pub record_energy: bool,
    pub diagonal: Diagonal,
}

impl StudyOptions {
    pub fn new(formulation: Formulation, levels: usize) -> Self {
        StudyOptions {
            formulation,
            levels,
            coarse_cells: COARSE_CELLS,
            dt: None,
            theta: 0.5,
            discretization_errors: false,
            record_energy: false,
            diagonal: Diagonal::Right,
        }
    }
}

/// One reported field and the norms shown for it.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldColumn {
    pub name: String,
    pub show_h1: bool,
    /// Optimal `(L², H¹)` orders for the "Optimal" row.
    pub optimal: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelRecord {
    /// `H`, `H/2`, ...
    pub label: String,
    pub cells_per_side: usize,
    pub dofs: usize,
    /// One entry per report field.
    pub errors: Vec<ErrorNorms>,
    pub max_residual: f64,
    pub steps: usize,
    /// `(t, energy)` when requested.
    pub energy: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub case: String,
    pub formulation: Formulation,
    pub discretization_errors: bool,
    pub diagonal: Diagonal,
    pub dt: f64,
    pub t_final: f64,
    pub fields: Vec<FieldColumn>,
    /// Coarse to fine.
    pub levels: Vec<LevelRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L2,
    H1,
}

impl ConvergenceReport {
    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|f| f.name == name)
    }

    pub fn errors(&self, field: &str, norm: Norm) -> Vec<f64> {
        let k = self.field_index(field).unwrap_or_else(|| panic!("no field {field} in report"));
        self.levels
            .iter()
            .map(|l| match norm {
                Norm::L2 => l.errors[k].l2,
                Norm::H1 => l.errors[k].h1,
            })
            .collect()
    }

    /// `log2(e_h / e_{h/2})` for each adjacent pair of levels.
    pub fn rates(&self, field: &str, norm: Norm) -> Vec<f64> {
        observed_rates(&self.errors(field, norm))
    }

    pub fn max_residual(&self) -> f64 {
        self.levels.iter().map(|l| l.max_residual).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,h,cells_per_side,dofs,steps,max_residual");
        for f in &self.fields {
            let _ = write!(s, ",{0}_l2,{0}_l2_rate", f.name);
            if f.show_h1 {
                let _ = write!(s, ",{0}_h1,{0}_h1_rate", f.name);
            }
        }
        s.push('\n');
        let rates: Vec<(Vec<f64>, Vec<f64>)> =
            self.fields.iter().map(|f| (self.rates(&f.name, Norm::L2), self.rates(&f.name, Norm::H1))).collect();
        for (i, l) in self.levels.iter().enumerate() {
            let _ = write!(s, "{i},{},{},{},{},{:.3e}", l.label, l.cells_per_side, l.dofs, l.steps, l.max_residual);
            for (k, f) in self.fields.iter().enumerate() {
                let rate = |r: &Vec<f64>| if i == 0 { String::new() } else { format!("{:.4}", r[i - 1]) };
                let _ = write!(s, ",{:.6e},{}", l.errors[k].l2, rate(&rates[k].0));
                if f.show_h1 {
                    let _ = write!(s, ",{:.6e},{}", l.errors[k].h1, rate(&rates[k].1));
                }
            }
            s.push('\n');
        }
        s
    }

    /// One aligned table per field: `h | L² | Rate | H¹ | Rate`, ending
    /// with the optimal orders.
    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let kind = if self.discretization_errors { "discretization errors" } else { "errors" };
        let _ = writeln!(
            s,
            "# {} ({}, {kind})\n\nT = {}, dt = {}, unit square split into n x n squares, each cut along the {} diagonal; H has n = {}.\n",
            self.case,
            self.formulation.label(),
            self.t_final,
            self.dt,
            self.diagonal.describe(),
            self.levels.first().map_or(0, |l| l.cells_per_side)
        );
        for (k, f) in self.fields.iter().enumerate() {
            let l2r = self.rates(&f.name, Norm::L2);
            let h1r = self.rates(&f.name, Norm::H1);
            let mut rows: Vec<Vec<String>> = vec![];
            let mut head = vec!["h".to_string(), format!("{} L2", f.name), "Rate".into()];
            if f.show_h1 {
                head.extend([format!("{} H1", f.name), "Rate".into()]);
            }
            rows.push(head);
            for (i, l) in self.levels.iter().enumerate() {
                let rate = |r: &[f64]| if i == 0 { String::new() } else { format!("{:.2}", r[i - 1]) };
                let mut row = vec![l.label.clone(), format!("{:.2e}", l.errors[k].l2), rate(&l2r)];
                if f.show_h1 {
                    row.extend([format!("{:.2e}", l.errors[k].h1), rate(&h1r)]);
                }
                rows.push(row);
            }
            let mut opt = vec!["Optimal".to_string(), String::new(), format!("{}", f.optimal.0)];
            if f.show_h1 {
                opt.extend([String::new(), format!("{}", f.optimal.1)]);
            }
            rows.push(opt);
            s.push_str(&aligned_table(&rows));
            s.push('\n');
        }
        s
    }
}

pub fn observed_rates(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn aligned_table(rows: &[Vec<String>]) -> String {
    let cols = rows[0].len();
    let width: Vec<usize> = (0..cols).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
    let line = |r: &Vec<String>| {
        let cells: Vec<String> = r.iter().zip(&width).map(|(v, &w)| format!("{v:<w$}")).collect();
        format!("| {} |\n", cells.join(" | "))
    };
    let mut s = line(&rows[0]);
    let dashes: Vec<String> = width.iter().map(|&w| "-".repeat(w)).collect();
    s.push_str(&format!("|-{}-|\n", dashes.join("-|-")));
    for r in &rows[1..] {
        s.push_str(&line(r));
    }
    s
}

fn level_label(k: usize) -> String {
    if k == 0 {
        "H".into()
    } else {
        format!("H/{}", 1usize << k)
    }
}

fn columns(case: &ManufacturedCase, options: &StudyOptions) -> Vec<FieldColumn> {
    let a = case.params.networks();
    let col = |name: String, show_h1, optimal| FieldColumn { name, show_h1, optimal };
    if options.discretization_errors {
        return (1..=a).map(|j| col(format!("p{j}"), true, (2.0, 2.0))).collect();
    }
    let mut out = vec![col("u".into(), true, (3.0, 2.0))];
    out.extend((1..=a).map(|j| col(format!("p{j}"), true, (2.0, 1.0))));
    if options.formulation == Formulation::TotalPressure {
        out.push(col("p0".into(), false, (2.0, 1.0)));
    }
    out
}

/// Builds the transient problem of a manufactured case on an `n x n` mesh.
pub fn manufactured_problem(case: &ManufacturedCase, formulation: Formulation, n: usize) -> Result<Problem, StepError> {
    manufactured_problem_on(case, formulation, build_unit_square_mesh(n))
}

/// The case posed on a given mesh with the whole boundary clamped.
pub fn manufactured_problem_on(
    case: &ManufacturedCase,
    formulation: Formulation,
    mesh: Mesh,
) -> Result<Problem, StepError> {
    let mesh = Arc::new(mesh);
    let a = case.params.networks();
    let spec = DirichletSpec::whole_boundary(a);
    let spaces: FieldSpaces = match formulation {
        Formulation::TotalPressure => make_taylor_hood_spaces(mesh, a, &spec),
        Formulation::Standard => make_standard_spaces(mesh, a, &spec),
    }
    .map_err(|e| StepError::Mismatch(e.to_string()))?;
    Ok(Problem {
        spaces,
        params: case.params.clone(),
        sources: case.sources.clone(),
        dirichlet: DirichletData::homogeneous(),
    })
}

/// Solves the case on each level and measures the errors at `T`.
pub fn convergence_study(case: &ManufacturedCase, options: &StudyOptions) -> Result<ConvergenceReport, StepError> {
    if options.levels < 2 {
        return Err(StepError::Grid(format!("a study needs at least 2 levels, got {}", options.levels)));
    }
    solve_levels(case, options, 0)
}

/// Errors of a single solve on mesh level `level` (`0` is `H`).
pub fn single_solve(
    case: &ManufacturedCase,
    options: &StudyOptions,
    level: usize,
) -> Result<ConvergenceReport, StepError> {
    solve_levels(case, &StudyOptions { levels: 1, ..options.clone() }, level)
}

fn solve_levels(
    case: &ManufacturedCase,
    options: &StudyOptions,
    first_level: usize,
) -> Result<ConvergenceReport, StepError> {
    let dt = options.dt.unwrap_or(case.dt);
    let grid = TimeGrid::new(case.t_final, dt, options.theta)?;
    let fields = columns(case, options);
    let a = case.params.networks();
    let t_end = case.t_final;
    let exact = &case.exact;
    let mut levels = Vec::with_capacity(options.levels);
    for k in first_level..first_level + options.levels {
        let n = options.coarse_cells << k;
        let problem =
            manufactured_problem_on(case, options.formulation, build_unit_square_mesh_with(n, options.diagonal))?;
        let initial_p: Vec<Arc<dyn Fn(Point) -> f64 + Send + Sync>> = (1..=a)
            .map(|j| {
                let e = exact.clone();
                Arc::new(move |x| e.p_value_grad(j, x, 0.0).0) as _
            })
            .collect();
        let initial = compatible_initial_state(&problem, &initial_p, 0.0)?;
        let run_opts = RunOptions { record_energy: options.record_energy, ..Default::default() };
        let out = run(&problem, &grid, initial, &run_opts, |_| {})?;
        let state = &out.final_state;
        let mut errors = Vec::new();
        if options.discretization_errors {
            for j in 1..=a {
                let proj = elliptic_projection(problem.spaces.pressure(j), &case.params.k[j - 1], |x| {
                    exact.p_value_grad(j, x, t_end)
                })
                .map_err(StepError::Initial)?;
                errors.push(difference_norms(&proj, state.p(j)));
            }
        } else {
            errors.push(error_norms(state.u(), |x| exact.u_value_grad(x, t_end)));
            for j in 1..=a {
                errors.push(scalar_error_norms(state.p(j), |x| exact.p_value_grad(j, x, t_end)));
            }
            if let Some(p0) = state.p0() {
                errors.push(scalar_error_norms(p0, |x| exact.p0_value_grad(&case.params, x, t_end)));
            }
        }
        levels.push(LevelRecord {
            label: level_label(k),
            cells_per_side: n,
            dofs: problem.spaces.total_dofs(),
            errors,
            max_residual: out.max_residual,
            steps: out.steps,
            energy: out.energy,
        });
    }
    Ok(ConvergenceReport {
        case: case.name.clone(),
        formulation: options.formulation,
        discretization_errors: options.discretization_errors,
        diagonal: options.diagonal,
        dt,
        t_final: case.t_final,
        fields,
        levels,
    })
}
