//! The four-network pulsatile brain scenario on an annulus.
//!
//! Network 1 is the extracellular (CSF-connected) space, 2 arterial, 3
//! venous and 4 capillary blood. Pressures are in Pa, lengths in mm and
//! time in s.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use crate::forms::{Formulation, ScalarFn, SourceData, VectorFn};
use crate::mesh::{build_annulus_mesh, read_mesh, Mesh, Point, SKULL, VENTRICLE};
use crate::params::{lame_from_e_nu, Conductivity, MpetParameters};
use crate::spaces::{make_standard_spaces, make_taylor_hood_spaces, DirichletSpec};
use crate::timestepper::{
    compatible_initial_state, run, DirichletData, MpetState, Probe, ProbeSeries, Problem, RunOptions, RunOutput,
    StepError, TimeGrid,
};

/// Pa per mmHg.
pub const MMHG: f64 = 133.32;
/// Extra CSF pulse amplitude on the ventricles (mmHg).
pub const TRANSMANTLE_DELTA: f64 = 0.012;
/// Length of one cardiac cycle (s).
pub const PERIOD: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    /// Concentric circles with `layers` element rings between them.
    Annulus { r_inner: f64, r_outer: f64, layers: usize },
    /// A mesh file whose facets carry the skull and ventricle tags.
    MeshFile(PathBuf),
}

impl Geometry {
    pub fn build(&self) -> Result<Mesh, StepError> {
        let mesh = match self {
            Geometry::Annulus { r_inner, r_outer, layers } => build_annulus_mesh(*r_inner, *r_outer, *layers),
            Geometry::MeshFile(path) => read_mesh(path),
        }
        .map_err(|e| StepError::Mismatch(format!("geometry: {e}")))?;
        Ok(mesh)
    }
}

/// The unknown a boundary condition acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcField {
    Displacement,
    /// Network pressure, 1-based.
    Pressure(usize),
}

#[derive(Clone)]
pub enum BcKind {
    /// Prescribed value; scalar fields read component 0.
    Dirichlet(VectorFn),
    /// Total traction `s n`.
    NormalStress(ScalarFn),
    /// Homogeneous natural condition (zero flux or zero traction).
    Natural,
}

impl std::fmt::Debug for BcKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BcKind::Dirichlet(_) => "Dirichlet",
            BcKind::NormalStress(_) => "NormalStress",
            BcKind::Natural => "Natural",
        })
    }
}

#[derive(Debug, Clone)]
pub struct BoundaryCondition {
    pub field: BcField,
    pub tag: u32,
    pub kind: BcKind,
}

#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub name: String,
    pub geometry: Geometry,
    pub params: MpetParameters,
    pub bcs: Vec<BoundaryCondition>,
    /// Spatially constant initial network pressures (Pa).
    pub initial_pressures: Vec<f64>,
    pub t_final: f64,
    pub dt: f64,
    pub theta: f64,
    pub probes: Vec<Probe>,
}

fn constant(v: f64) -> VectorFn {
    Arc::new(move |_, _| [v, 0.0])
}

fn pulse(base: f64, amplitude: f64) -> VectorFn {
    Arc::new(move |_, t| [MMHG * (base + amplitude * (2.0 * PI * t).sin()), 0.0])
}

/// Brain parameters and boundary program on an annulus of radii 30 and
/// 100 mm, run for three cardiac cycles.
pub fn brain_scenario() -> ScenarioSpec {
    brain_scenario_with(Geometry::Annulus { r_inner: 30.0, r_outer: 100.0, layers: 10 })
}

pub fn brain_scenario_with(geometry: Geometry) -> ScenarioSpec {
    let (mu, lam) = lame_from_e_nu(1500.0, 0.4999).expect("valid moduli");
    let mut xi = vec![vec![0.0; 4]; 4];
    for (j, i) in [(2, 4), (4, 3), (4, 1), (1, 3)] {
        xi[j - 1][i - 1] = 1e-6;
        xi[i - 1][j - 1] = 1e-6;
    }
    let params = MpetParameters {
        mu,
        lam,
        alpha: vec![0.49, 0.25, 0.01, 0.25],
        c: vec![3.9e-4, 2.9e-4, 1.5e-5, 2.9e-4],
        k: vec![
            Conductivity::Constant(1.57e-5),
            Conductivity::Constant(3.75e-2),
            Conductivity::Constant(3.75e-2),
            Conductivity::Constant(3.75e-2),
        ],
        xi,
    };
    let alpha = params.alpha.clone();
    // ventricular reference pressures p~_1..p~_4 in mmHg
    let reference = move |t: f64| {
        let s = (2.0 * PI * t).sin();
        [5.0 + (2.0 + TRANSMANTLE_DELTA) * s, 70.0 + 10.0 * s, 6.0, 38.0]
    };
    let stress: ScalarFn = Arc::new(move |_, t| {
        let p = reference(t);
        -MMHG * alpha.iter().zip(p).map(|(a, p)| a * p).sum::<f64>()
    });
    let bc = |field, tag, kind| BoundaryCondition { field, tag, kind };
    use BcField::{Displacement as U, Pressure as P};
    let bcs = vec![
        bc(U, SKULL, BcKind::Dirichlet(Arc::new(|_, _| [0.0, 0.0]))),
        bc(U, VENTRICLE, BcKind::NormalStress(stress)),
        bc(P(1), SKULL, BcKind::Dirichlet(pulse(5.0, 2.0))),
        bc(P(1), VENTRICLE, BcKind::Dirichlet(pulse(5.0, 2.0 + TRANSMANTLE_DELTA))),
        bc(P(2), SKULL, BcKind::Dirichlet(pulse(70.0, 10.0))),
        bc(P(2), VENTRICLE, BcKind::Natural),
        bc(P(3), SKULL, BcKind::Dirichlet(constant(6.0 * MMHG))),
        bc(P(3), VENTRICLE, BcKind::Dirichlet(constant(6.0 * MMHG))),
        bc(P(4), SKULL, BcKind::Natural),
        bc(P(4), VENTRICLE, BcKind::Natural),
    ];
    let probes = vec![
        Probe::new("mid", [65.0, 0.0]),
        Probe::new("north", [0.0, 50.0]),
        Probe::new("west", [-80.0, 0.0]),
        Probe::new("skull_adjacent", [99.75, 0.0]),
        Probe::new("ventricle_adjacent", [30.25, 0.0]),
        Probe::new("skull", [100.0, 0.0]),
    ];
    ScenarioSpec {
        name: "brain".into(),
        geometry,
        params,
        bcs,
        initial_pressures: [5.0, 70.0, 6.0, 38.0].iter().map(|p| p * MMHG).collect(),
        t_final: 3.0,
        dt: 0.0125,
        theta: 0.5,
        probes,
    }
}

impl ScenarioSpec {
    /// Checks that every (field, tag) pair of the mesh has exactly one condition.
    pub fn validate(&self, mesh: &Mesh) -> Result<(), StepError> {
        let a = self.params.networks();
        if self.initial_pressures.len() != a {
            return Err(StepError::Mismatch(format!(
                "{} initial pressures for {a} networks",
                self.initial_pressures.len()
            )));
        }
        let fields = std::iter::once(BcField::Displacement).chain((1..=a).map(BcField::Pressure));
        for field in fields {
            for tag in mesh.tags() {
                let n = self.bcs.iter().filter(|b| b.field == field && b.tag == tag).count();
                if n != 1 {
                    return Err(StepError::Mismatch(format!(
                        "{field:?} on tag {tag} has {n} boundary conditions, expected 1"
                    )));
                }
            }
        }
        for b in &self.bcs {
            match (b.field, &b.kind) {
                (BcField::Pressure(j), _) if j == 0 || j > a => {
                    return Err(StepError::Mismatch(format!("boundary condition for nonexistent network {j}")))
                }
                (BcField::Pressure(j), BcKind::NormalStress(_)) => {
                    return Err(StepError::Mismatch(format!("normal stress given for pressure p{j}")))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Assembles the transient problem for one formulation.
    pub fn problem(&self, formulation: Formulation) -> Result<Problem, StepError> {
        let mesh = self.geometry.build()?;
        self.validate(&mesh)?;
        let a = self.params.networks();
        let dirichlet_tags = |field: BcField| -> Vec<u32> {
            self.bcs
                .iter()
                .filter(|b| b.field == field && matches!(b.kind, BcKind::Dirichlet(_)))
                .map(|b| b.tag)
                .collect()
        };
        let spec = DirichletSpec {
            displacement: dirichlet_tags(BcField::Displacement),
            pressures: (1..=a).map(|j| dirichlet_tags(BcField::Pressure(j))).collect(),
        };
        let mesh = Arc::new(mesh);
        let spaces = match formulation {
            Formulation::TotalPressure => make_taylor_hood_spaces(mesh, a, &spec),
            Formulation::Standard => make_standard_spaces(mesh, a, &spec),
        }
        .map_err(|e| StepError::Mismatch(e.to_string()))?;
        let mut dirichlet = DirichletData::default();
        let mut sources = SourceData::zero(a);
        for b in &self.bcs {
            let field = match b.field {
                BcField::Displacement => 0,
                BcField::Pressure(j) => spaces.pressure_field(j),
            };
            match &b.kind {
                BcKind::Dirichlet(f) => dirichlet.entries.push((field, b.tag, f.clone())),
                BcKind::NormalStress(s) => sources.normal_stress.push((b.tag, s.clone())),
                BcKind::Natural => {}
            }
        }
        Ok(Problem { spaces, params: self.params.clone(), sources, dirichlet })
    }

    pub fn grid(&self) -> Result<TimeGrid, StepError> {
        TimeGrid::new(self.t_final, self.dt, self.theta)
    }
}

/// Minimum, maximum and mean of one probe column over one cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleSummary {
    pub column: String,
    /// 1-based cycle number.
    pub cycle: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    pub formulation: Formulation,
    pub run: RunOutput,
    pub cycles: Vec<CycleSummary>,
    /// Largest absolute displacement coefficient on the skull.
    pub skull_displacement: f64,
}

impl ScenarioOutput {
    pub fn probes(&self) -> &ProbeSeries {
        &self.run.probes
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("formulation,column,cycle,min,max,mean\n");
        for c in &self.cycles {
            let _ = writeln!(
                s,
                "{},{},{},{:e},{:e},{:e}",
                self.formulation.label(),
                c.column,
                c.cycle,
                c.min,
                c.max,
                c.mean
            );
        }
        s
    }
}

fn steps_per_cycle(series: &ProbeSeries) -> usize {
    let dt = series.times.get(1).map_or(PERIOD, |t| t - series.times[0]);
    (PERIOD / dt).round() as usize
}

/// Per-cycle min/max/mean of every probe column; a cycle spans the samples
/// at both of its ends.
pub fn cycle_summaries(series: &ProbeSeries) -> Vec<CycleSummary> {
    let n = steps_per_cycle(series);
    let cycles = (series.times.len() - 1) / n.max(1);
    let mut out = Vec::new();
    for (k, name) in series.columns.iter().enumerate() {
        for cycle in 0..cycles {
            let vals: Vec<f64> = series.rows[cycle * n..=(cycle + 1) * n].iter().map(|r| r[k]).collect();
            let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            // rounding can push the mean of a constant series past its bounds
            let mean = (vals.iter().sum::<f64>() / vals.len() as f64).clamp(min, max);
            out.push(CycleSummary { column: name.clone(), cycle: cycle + 1, min, max, mean });
        }
    }
    out
}

/// `max |y(t + P) − y(t)| / max |y(t + P)|` over cycle `cycle` (1-based)
/// and the next one, per column; zero columns report 0.
pub fn periodicity(series: &ProbeSeries, cycle: usize) -> Vec<(String, f64)> {
    let n = steps_per_cycle(series);
    let start = (cycle - 1) * n;
    series
        .columns
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let mut diff: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for i in 0..=n {
                let (a, b) = (series.rows[start + i][k], series.rows[start + n + i][k]);
                diff = diff.max((a - b).abs());
                scale = scale.max(b.abs());
            }
            (name.clone(), if scale == 0.0 { 0.0 } else { diff / scale })
        })
        .collect()
}

/// Runs a scenario from its compatible initial state.
pub fn run_scenario(
    spec: &ScenarioSpec,
    formulation: Formulation,
    record_energy: bool,
) -> Result<ScenarioOutput, StepError> {
    let problem = spec.problem(formulation)?;
    let initial_p: Vec<Arc<dyn Fn(Point) -> f64 + Send + Sync>> = spec
        .initial_pressures
        .iter()
        .map(|&p| Arc::new(move |_: Point| p) as Arc<dyn Fn(Point) -> f64 + Send + Sync>)
        .collect();
    let initial = compatible_initial_state(&problem, &initial_p, 0.0)?;
    let options = RunOptions { probes: spec.probes.clone(), record_energy, refactor_each_step: false };
    let out = run(&problem, &spec.grid()?, initial, &options, |_| {})?;
    let skull_displacement = skull_displacement(&problem, &out.final_state);
    Ok(ScenarioOutput { formulation, cycles: cycle_summaries(&out.probes), run: out, skull_displacement })
}

fn skull_displacement(problem: &Problem, state: &MpetState) -> f64 {
    let v = problem.spaces.displacement();
    v.nodes_on_tag(SKULL)
        .iter()
        .flat_map(|&n| [2 * n, 2 * n + 1])
        .map(|d| state.u().coefficients[d].abs())
        .fold(0.0, f64::max)
}

/// Probe-wise comparison of the two formulations on one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct FormulationComparison {
    /// `(probe label, max_t |u| total-pressure / max_t |u| standard)`.
    pub displacement_ratio: Vec<(String, f64)>,
    /// `(column, max_t |p_tp − p_std| / max_t |p_tp|)` for pressure columns.
    pub pressure_difference: Vec<(String, f64)>,
}

pub fn compare_formulations(total: &ProbeSeries, standard: &ProbeSeries) -> FormulationComparison {
    let mut displacement_ratio = Vec::new();
    let mut pressure_difference = Vec::new();
    for name in &total.columns {
        let (Some(a), Some(b)) = (total.column(name), standard.column(name)) else { continue };
        let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if let Some(label) = name.strip_prefix("u_mag@") {
            let (ma, mb) = (max_abs(&a), max_abs(&b));
            let ratio = if mb == 0.0 {
                if ma == 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            } else {
                ma / mb
            };
            displacement_ratio.push((label.to_string(), ratio));
        } else {
            let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
            let scale = max_abs(&a);
            pressure_difference.push((name.clone(), if scale == 0.0 { 0.0 } else { max_abs(&diff) / scale }));
        }
    }
    FormulationComparison { displacement_ratio, pressure_difference }
}

impl FormulationComparison {
    pub fn to_markdown(&self) -> String {
        let mut s = String::from("| probe | max abs u ratio (total-pressure / standard) |\n|---|---|\n");
        for (label, r) in &self.displacement_ratio {
            let _ = writeln!(s, "| {label} | {r:.4} |");
        }
        s.push_str("\n| pressure column | max relative difference |\n|---|---|\n");
        for (name, d) in &self.pressure_difference {
            let _ = writeln!(s, "| {name} | {d:.3e} |");
        }
        s
    }
}
