//! Compatible initial states and the θ-scheme step loop.

use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::forms::{
    assemble_load, standard_forms, total_pressure_forms, EnergyOperator, FormBlocks, FormError, Formulation,
    SourceData, ThetaOperator, VectorFn,
};
use crate::linalg::{DirichletElimination, Factorized, LinalgError};
use crate::mesh::Point;
use crate::params::MpetParameters;
use crate::spaces::{interpolate_scalar, FEFunction, FieldSpaces};

#[derive(Debug, Error)]
pub enum StepError {
    #[error("invalid time grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("initial state: {0}")]
    Initial(LinalgError),
    #[error("solver failed at step {step} (t = {t}): {source}")]
    Solver { step: usize, t: f64, source: LinalgError },
    #[error("probe {label} at ({x}, {y}) lies outside the mesh")]
    ProbeOutside { label: String, x: f64, y: f64 },
    #[error("{0}")]
    Mismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_final: f64,
    pub dt: f64,
    pub theta: f64,
}

impl TimeGrid {
    pub fn new(t_final: f64, dt: f64, theta: f64) -> Result<Self, StepError> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(StepError::Grid(format!("T = {t_final} must be positive")));
        }
        if !(dt > 0.0 && dt <= t_final) {
            return Err(StepError::Grid(format!("dt = {dt} must lie in (0, T]")));
        }
        let ratio = t_final / dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(StepError::Grid(format!("T / dt = {ratio} is not an integer")));
        }
        if !(0.5..=1.0).contains(&theta) {
            return Err(StepError::Grid(format!("theta = {theta} must lie in [1/2, 1]")));
        }
        Ok(TimeGrid { t_final, dt, theta })
    }

    pub fn crank_nicolson(t_final: f64, dt: f64) -> Result<Self, StepError> {
        Self::new(t_final, dt, 0.5)
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// Prescribed values on Dirichlet tags; unlisted constrained dofs are zero.
#[derive(Clone, Default)]
pub struct DirichletData {
    /// `(field index, tag, value)`; scalar fields use component 0.
    pub entries: Vec<(usize, u32, VectorFn)>,
}

impl std::fmt::Debug for DirichletData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.entries.iter().map(|e| (e.0, e.1))).finish()
    }
}

impl DirichletData {
    pub fn homogeneous() -> Self {
        DirichletData::default()
    }

    /// Full-length vector holding the prescribed values at constrained dofs.
    pub fn values(&self, spaces: &FieldSpaces, t: f64) -> Vec<f64> {
        let off = spaces.offsets();
        let mut out = vec![0.0; spaces.total_dofs()];
        for (field, space) in spaces.spaces.iter().enumerate() {
            let vs = space.value_size;
            let mut done = vec![false; space.num_nodes()];
            for &tag in &space.constrained_tags {
                let entry = self.entries.iter().find(|e| e.0 == field && e.1 == tag);
                for &node in space.nodes_on_tag(tag) {
                    if done[node] {
                        continue;
                    }
                    done[node] = true;
                    if let Some((_, _, f)) = entry {
                        let v = f(space.node_coords()[node], t);
                        for k in 0..vs {
                            out[off[field] + node * vs + k] = v[k];
                        }
                    }
                }
            }
        }
        out
    }
}

/// Everything except time stepping parameters that defines a transient run.
#[derive(Debug, Clone)]
pub struct Problem {
    pub spaces: FieldSpaces,
    pub params: MpetParameters,
    pub sources: SourceData,
    pub dirichlet: DirichletData,
}

impl Problem {
    pub fn formulation(&self) -> Formulation {
        if self.spaces.total_pressure {
            Formulation::TotalPressure
        } else {
            Formulation::Standard
        }
    }

    pub fn constrained_dofs(&self) -> Vec<usize> {
        let off = self.spaces.offsets();
        self.spaces
            .spaces
            .iter()
            .enumerate()
            .flat_map(|(f, s)| {
                let base = off[f];
                s.constrained_dofs().iter().map(move |&d| base + d)
            })
            .collect()
    }

    pub fn forms(&self) -> Result<FormBlocks, FormError> {
        match self.formulation() {
            Formulation::TotalPressure => total_pressure_forms(&self.spaces, &self.params),
            Formulation::Standard => standard_forms(&self.spaces, &self.params),
        }
    }

    pub fn operator(&self, dt: f64, theta: f64) -> Result<ThetaOperator, FormError> {
        ThetaOperator::new(self.forms()?, dt, theta)
    }
}

#[derive(Debug, Clone)]
pub struct MpetState {
    pub t: f64,
    pub formulation: Formulation,
    /// Field order `(u, [p0], p1..pA)`.
    pub fields: Vec<FEFunction>,
}

impl MpetState {
    pub fn from_vector(spaces: &FieldSpaces, t: f64, y: &[f64]) -> Self {
        let off = spaces.offsets();
        let fields = spaces
            .spaces
            .iter()
            .enumerate()
            .map(|(f, s)| FEFunction::from_coefficients(s.clone(), y[off[f]..off[f + 1]].to_vec()))
            .collect();
        let formulation = if spaces.total_pressure { Formulation::TotalPressure } else { Formulation::Standard };
        MpetState { t, formulation, fields }
    }

    pub fn to_vector(&self) -> Vec<f64> {
        self.fields.iter().flat_map(|f| f.coefficients.iter().copied()).collect()
    }

    pub fn u(&self) -> &FEFunction {
        &self.fields[0]
    }

    pub fn p0(&self) -> Option<&FEFunction> {
        (self.formulation == Formulation::TotalPressure).then(|| &self.fields[1])
    }

    /// Network pressure `j` (1-based).
    pub fn p(&self, j: usize) -> &FEFunction {
        &self.fields[j + usize::from(self.formulation == Formulation::TotalPressure)]
    }

    pub fn networks(&self) -> usize {
        self.fields.len() - 1 - usize::from(self.formulation == Formulation::TotalPressure)
    }
}

/// Solves the algebraic rows for `(u, [p0])` with network pressures frozen.
pub fn solve_algebraic_subsystem(problem: &Problem, pressures: &[Vec<f64>], t: f64) -> Result<MpetState, StepError> {
    let spaces = &problem.spaces;
    let a = spaces.networks();
    if pressures.len() != a {
        return Err(StepError::Mismatch(format!("{} initial pressures for {a} networks", pressures.len())));
    }
    let k = problem.forms()?.stiffness.to_csr();
    let off = spaces.offsets();
    let first = spaces.pressure_field(1);
    let mut values = problem.dirichlet.values(spaces, t);
    let mut constrained = problem.constrained_dofs();
    for (j, p) in pressures.iter().enumerate() {
        let f = first + j;
        values[off[f]..off[f + 1]].copy_from_slice(p);
        constrained.extend(off[f]..off[f + 1]);
    }
    constrained.sort_unstable();
    constrained.dedup();
    let elim = DirichletElimination::new(&k, &constrained);
    let mut b = assemble_load(spaces, &problem.sources, t)?;
    elim.apply(&mut b, &values);
    let fac = Factorized::new(elim.matrix).map_err(StepError::Initial)?;
    let (y, _) = fac.solve(&b).map_err(StepError::Initial)?;
    Ok(MpetState::from_vector(spaces, t, &y))
}

/// Interpolates the initial pressures and solves for the matching
/// displacement (and total pressure).
pub fn compatible_initial_state(
    problem: &Problem,
    initial_pressures: &[Arc<dyn Fn(Point) -> f64 + Send + Sync>],
    t0: f64,
) -> Result<MpetState, StepError> {
    let a = problem.spaces.networks();
    if initial_pressures.len() != a {
        return Err(StepError::Mismatch(format!("{} initial pressures for {a} networks", initial_pressures.len())));
    }
    let p: Vec<Vec<f64>> = initial_pressures
        .iter()
        .enumerate()
        .map(|(j, f)| interpolate_scalar(problem.spaces.pressure(j + 1), |x| f(x)).coefficients)
        .collect();
    solve_algebraic_subsystem(problem, &p, t0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub label: String,
    pub point: Point,
}

impl Probe {
    pub fn new(label: impl Into<String>, point: Point) -> Self {
        Probe { label: label.into(), point }
    }
}

/// Time series of `|u|` and every network pressure at each probe.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSeries {
    pub columns: Vec<String>,
    pub times: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

impl ProbeSeries {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t");
        for c in &self.columns {
            s.push(',');
            s.push_str(c);
        }
        s.push('\n');
        for (t, row) in self.times.iter().zip(&self.rows) {
            let _ = write!(s, "{t}");
            for v in row {
                let _ = write!(s, ",{v:e}");
            }
            s.push('\n');
        }
        s
    }
}

struct ProbeSampler {
    cells: Vec<(usize, [f64; 3])>,
    networks: usize,
}

impl ProbeSampler {
    fn new(spaces: &FieldSpaces, probes: &[Probe]) -> Result<(Self, Vec<String>), StepError> {
        let mut cells = Vec::new();
        let mut columns = Vec::new();
        let a = spaces.networks();
        for p in probes {
            let loc = spaces.displacement().locate(p.point).ok_or_else(|| StepError::ProbeOutside {
                label: p.label.clone(),
                x: p.point[0],
                y: p.point[1],
            })?;
            cells.push(loc);
            columns.push(format!("u_mag@{}", p.label));
            for j in 1..=a {
                columns.push(format!("p{j}@{}", p.label));
            }
        }
        Ok((ProbeSampler { cells, networks: a }, columns))
    }

    fn sample(&self, state: &MpetState) -> Vec<f64> {
        let mut row = Vec::with_capacity(self.cells.len() * (1 + self.networks));
        for &(c, b) in &self.cells {
            let u = state.u().eval_in_cell(c, b);
            row.push(u[0].hypot(u[1]));
            for j in 1..=self.networks {
                row.push(state.p(j).eval_in_cell(c, b)[0]);
            }
        }
        row
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub probes: Vec<Probe>,
    pub record_energy: bool,
    /// Factorize the step matrix anew every step instead of once.
    pub refactor_each_step: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub final_state: MpetState,
    pub probes: ProbeSeries,
    /// `(t, energy)` including the initial state.
    pub energy: Vec<(f64, f64)>,
    pub max_residual: f64,
    pub steps: usize,
}

/// Advances `initial` to `grid.t_final`; `observer` sees every new state.
pub fn run(
    problem: &Problem,
    grid: &TimeGrid,
    initial: MpetState,
    options: &RunOptions,
    mut observer: impl FnMut(&MpetState),
) -> Result<RunOutput, StepError> {
    let spaces = &problem.spaces;
    if initial.formulation != problem.formulation() || initial.fields.len() != spaces.len() {
        return Err(StepError::Mismatch("initial state does not match the problem's formulation".into()));
    }
    let t_start = initial.t;
    let remaining = (grid.t_final - t_start) / grid.dt;
    if remaining < -1e-9 || (remaining - remaining.round()).abs() > 1e-9 * remaining.abs().max(1.0) {
        return Err(StepError::Grid(format!(
            "cannot reach T = {} from t = {t_start} with dt = {}",
            grid.t_final, grid.dt
        )));
    }
    let steps = remaining.round() as usize;

    let op = problem.operator(grid.dt, grid.theta)?;
    let constrained = problem.constrained_dofs();
    let elim = DirichletElimination::new(&op.lhs, &constrained);
    let factor_once = if options.refactor_each_step {
        None
    } else {
        Some(Factorized::new(elim.matrix.clone()).map_err(|source| StepError::Solver {
            step: 1,
            t: t_start + grid.dt,
            source,
        })?)
    };
    let (sampler, columns) = ProbeSampler::new(spaces, &options.probes)?;
    let energy_op = options.record_energy.then(|| EnergyOperator::new(spaces, &problem.params));

    let mut series = ProbeSeries { columns, times: vec![t_start], rows: vec![sampler.sample(&initial)] };
    let mut energy = Vec::new();
    let mut y = initial.to_vector();
    if let Some(e) = &energy_op {
        energy.push((t_start, e.energy(&y)));
    }
    let mut load_prev = assemble_load(spaces, &problem.sources, t_start)?;
    let mut max_residual: f64 = 0.0;
    let mut state = initial;

    for n in 1..=steps {
        let t = t_start + n as f64 * grid.dt;
        let load_next = assemble_load(spaces, &problem.sources, t)?;
        let mut b = op.rhs(&load_next, &load_prev, &y);
        elim.apply(&mut b, &problem.dirichlet.values(spaces, t));
        let solved = match &factor_once {
            Some(f) => f.solve(&b),
            None => Factorized::new(elim.matrix.clone()).and_then(|f| f.solve(&b)),
        };
        let (next, res) = solved.map_err(|source| StepError::Solver { step: n, t, source })?;
        max_residual = max_residual.max(res);
        y = next;
        load_prev = load_next;
        state = MpetState::from_vector(spaces, t, &y);
        series.times.push(t);
        series.rows.push(sampler.sample(&state));
        if let Some(e) = &energy_op {
            energy.push((t, e.energy(&y)));
        }
        observer(&state);
    }
    Ok(RunOutput { final_state: state, probes: series, energy, max_residual, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{example1_case, manufactured_problem};

    fn zero_pressures(a: usize) -> Vec<Arc<dyn Fn(Point) -> f64 + Send + Sync>> {
        (0..a).map(|_| Arc::new(|_: Point| 0.0) as _).collect()
    }

    #[test]
    fn grid_validation() {
        let g = TimeGrid::crank_nicolson(0.5, 0.125).unwrap();
        assert_eq!(g.steps(), 4);
        assert_eq!(TimeGrid::new(3.0, 0.0125, 0.5).unwrap().steps(), 240);
        assert!(TimeGrid::new(0.0, 0.1, 0.5).is_err());
        assert!(TimeGrid::new(1.0, 2.0, 0.5).is_err());
        assert!(TimeGrid::new(1.0, 0.3, 0.5).is_err());
        assert!(TimeGrid::new(1.0, 0.25, 0.4).is_err());
    }

    #[test]
    fn example1_initial_state_vanishes() {
        let case = example1_case(0.49999, 1.0);
        for f in [Formulation::TotalPressure, Formulation::Standard] {
            let problem = manufactured_problem(&case, f, 4).unwrap();
            let s = compatible_initial_state(&problem, &zero_pressures(2), 0.0).unwrap();
            assert!(s.to_vector().iter().all(|v| v.abs() <= 1e-10));
            assert_eq!(s.formulation, f);
        }
    }

    #[test]
    fn four_steps_reach_t_final() {
        let case = example1_case(0.49999, 1.0);
        let problem = manufactured_problem(&case, Formulation::TotalPressure, 4).unwrap();
        let grid = TimeGrid::crank_nicolson(0.5, 0.125).unwrap();
        let initial = compatible_initial_state(&problem, &zero_pressures(2), 0.0).unwrap();
        let mut seen = Vec::new();
        let out = run(&problem, &grid, initial, &RunOptions::default(), |s| seen.push(s.t)).unwrap();
        assert_eq!(out.steps, 4);
        assert_eq!(seen.len(), 4);
        assert!((out.final_state.t - 0.5).abs() < 1e-14);
        assert!(out.max_residual <= 1e-10);
    }

    #[test]
    fn zero_data_gives_zero_probes() {
        let mut case = example1_case(0.3, 1.0);
        case.sources = SourceData::zero(2);
        let problem = manufactured_problem(&case, Formulation::Standard, 4).unwrap();
        let grid = TimeGrid::crank_nicolson(0.5, 0.125).unwrap();
        let initial = compatible_initial_state(&problem, &zero_pressures(2), 0.0).unwrap();
        let options = RunOptions {
            probes: vec![Probe::new("c", [0.5, 0.5]), Probe::new("corner", [0.0, 0.0])],
            ..Default::default()
        };
        let out = run(&problem, &grid, initial, &options, |_| {}).unwrap();
        assert_eq!(out.probes.rows.len(), 5);
        assert!(out.probes.rows.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn mismatched_state_or_grid_is_rejected() {
        let case = example1_case(0.49999, 1.0);
        let tp = manufactured_problem(&case, Formulation::TotalPressure, 2).unwrap();
        let std = manufactured_problem(&case, Formulation::Standard, 2).unwrap();
        let grid = TimeGrid::crank_nicolson(0.5, 0.125).unwrap();
        let s = compatible_initial_state(&std, &zero_pressures(2), 0.0).unwrap();
        assert!(matches!(run(&tp, &grid, s.clone(), &RunOptions::default(), |_| {}), Err(StepError::Mismatch(_))));
        let late = MpetState { t: 0.2, ..s };
        assert!(matches!(run(&std, &grid, late, &RunOptions::default(), |_| {}), Err(StepError::Grid(_))));
        assert!(compatible_initial_state(&std, &zero_pressures(3), 0.0).is_err());
    }
}
