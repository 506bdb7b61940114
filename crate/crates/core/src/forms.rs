//! Bilinear and linear forms of the total-pressure and standard
//! formulations, and their θ-scheme time discretization.
//!
//! Forms are kept in "physical" sign: momentum and total-pressure rows are
//! algebraic (`K y = F`), network rows are dynamic (`M y' + K y = F`).
//! [`ThetaOperator`] negates the dynamic rows, which makes the step matrix
//! symmetric for both formulations.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::elements::{quadrature, CellGeometry, Tabulation, MAX_NODES, P1, P2};
use crate::linalg::{BlockMatrix, CooMatrix, CsrMatrix};
use crate::mesh::{Mesh, Point};
use crate::params::{Conductivity, MpetParameters, ParamError};
use crate::spaces::{FESpace, FieldSpaces};

/// Quadrature degree of the bilinear forms.
pub const FORM_DEGREE: usize = 5;
/// Quadrature degree of source terms and error norms.
pub const SOURCE_DEGREE: usize = 6;

#[derive(Debug, Error)]
pub enum FormError {
    #[error("{0}")]
    Mismatch(String),
    #[error("non-finite {what} at t = {t}")]
    NonFinite { what: String, t: f64 },
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("invalid time discretization: {0}")]
    Time(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formulation {
    TotalPressure,
    Standard,
}

impl Formulation {
    pub fn label(&self) -> &'static str {
        match self {
            Formulation::TotalPressure => "total-pressure",
            Formulation::Standard => "standard",
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Formulation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "total-pressure" | "total_pressure" | "tp" => Ok(Formulation::TotalPressure),
            "standard" | "std" => Ok(Formulation::Standard),
            other => Err(format!("unknown formulation `{other}` (expected total-pressure or standard)")),
        }
    }
}

fn tab(degree: usize, rule: usize) -> Tabulation {
    let el = if degree == 1 { P1 } else { P2 };
    Tabulation::new(el, quadrature(rule).expect("supported rule"))
}

/// Visits every quadrature point of every cell with `(cell, q, geometry, dx)`.
fn for_each_qp(mesh: &Mesh, rule_points: usize, weights: &[f64], mut f: impl FnMut(usize, usize, &CellGeometry, f64)) {
    for c in 0..mesh.num_cells() {
        let geo = CellGeometry::new(mesh.cell_points(c));
        for q in 0..rule_points {
            f(c, q, &geo, weights[q] * geo.det.abs());
        }
    }
}

/// `<2 mu eps(u), eps(v)>` on a vector space.
pub fn assemble_elasticity(v: &FESpace, mu: f64) -> CsrMatrix {
    let t = tab(v.degree(), FORM_DEGREE);
    let nn = v.nodes_per_cell();
    let nd = 2 * nn;
    let mut coo = CooMatrix::new(v.ndofs(), v.ndofs());
    let mut local = vec![0.0; nd * nd];
    for c in 0..v.mesh.num_cells() {
        let geo = v.geometry(c);
        local.iter_mut().for_each(|x| *x = 0.0);
        for q in 0..t.rule.points.len() {
            let w = t.rule.weights[q] * geo.det.abs() * mu;
            let g = t.physical_grads(q, &geo);
            for a in 0..nn {
                for b in 0..nn {
                    let dot = g[a][0] * g[b][0] + g[a][1] * g[b][1];
                    for ci in 0..2 {
                        for di in 0..2 {
                            let delta = if ci == di { dot } else { 0.0 };
                            local[(2 * a + ci) * nd + 2 * b + di] += w * (delta + g[a][di] * g[b][ci]);
                        }
                    }
                }
            }
        }
        let dofs = v.cell_dofs(c);
        coo.assemble_add(&local, &dofs, &dofs).expect("dofs in range");
    }
    coo.to_csr()
}

/// `<div u, div v>` on a vector space.
pub fn assemble_grad_div(v: &FESpace) -> CsrMatrix {
    let t = tab(v.degree(), FORM_DEGREE);
    let nn = v.nodes_per_cell();
    let nd = 2 * nn;
    let mut coo = CooMatrix::new(v.ndofs(), v.ndofs());
    let mut local = vec![0.0; nd * nd];
    for c in 0..v.mesh.num_cells() {
        let geo = v.geometry(c);
        local.iter_mut().for_each(|x| *x = 0.0);
        for q in 0..t.rule.points.len() {
            let w = t.rule.weights[q] * geo.det.abs();
            let g = t.physical_grads(q, &geo);
            for i in 0..nd {
                for j in 0..nd {
                    local[i * nd + j] += w * g[i / 2][i % 2] * g[j / 2][j % 2];
                }
            }
        }
        let dofs = v.cell_dofs(c);
        coo.assemble_add(&local, &dofs, &dofs).expect("dofs in range");
    }
    coo.to_csr()
}

/// `<div u, q>` with rows in the scalar space `q` and columns in `v`.
pub fn assemble_divergence(q: &FESpace, v: &FESpace) -> CsrMatrix {
    let tv = tab(v.degree(), FORM_DEGREE);
    let tq = tab(q.degree(), FORM_DEGREE);
    let (nq, nv) = (q.nodes_per_cell(), 2 * v.nodes_per_cell());
    let mut coo = CooMatrix::new(q.ndofs(), v.ndofs());
    let mut local = vec![0.0; nq * nv];
    for c in 0..v.mesh.num_cells() {
        let geo = v.geometry(c);
        local.iter_mut().for_each(|x| *x = 0.0);
        for k in 0..tv.rule.points.len() {
            let w = tv.rule.weights[k] * geo.det.abs();
            let g = tv.physical_grads(k, &geo);
            for i in 0..nq {
                let psi = tq.values[k][i];
                for j in 0..nv {
                    local[i * nv + j] += w * psi * g[j / 2][j % 2];
                }
            }
        }
        coo.assemble_add(&local, &q.cell_dofs(c), &v.cell_dofs(c)).expect("dofs in range");
    }
    coo.to_csr()
}

/// `<p, q>` on a scalar space.
pub fn assemble_mass(s: &FESpace) -> CsrMatrix {
    let t = tab(s.degree(), FORM_DEGREE);
    let n = s.nodes_per_cell();
    let mut coo = CooMatrix::new(s.ndofs(), s.ndofs());
    let mut local = [0.0; MAX_NODES * MAX_NODES];
    for c in 0..s.mesh.num_cells() {
        let geo = s.geometry(c);
        local.iter_mut().for_each(|x| *x = 0.0);
        for q in 0..t.rule.points.len() {
            let w = t.rule.weights[q] * geo.det.abs();
            for a in 0..n {
                for b in 0..n {
                    local[a * n + b] += w * t.values[q][a] * t.values[q][b];
                }
            }
        }
        let dofs = s.cell_dofs(c);
        coo.assemble_add(&local[..n * n], &dofs, &dofs).expect("dofs in range");
    }
    coo.to_csr()
}

/// `<K grad p, grad q>` on a scalar space.
pub fn assemble_laplace(s: &FESpace, k: &Conductivity) -> CsrMatrix {
    let t = tab(s.degree(), FORM_DEGREE);
    let n = s.nodes_per_cell();
    let mut coo = CooMatrix::new(s.ndofs(), s.ndofs());
    let mut local = [0.0; MAX_NODES * MAX_NODES];
    for c in 0..s.mesh.num_cells() {
        let geo = s.geometry(c);
        local.iter_mut().for_each(|x| *x = 0.0);
        for q in 0..t.rule.points.len() {
            let w = t.rule.weights[q] * geo.det.abs() * k.at(geo.map(t.rule.points[q]));
            let g = t.physical_grads(q, &geo);
            for a in 0..n {
                for b in 0..n {
                    local[a * n + b] += w * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                }
            }
        }
        let dofs = s.cell_dofs(c);
        coo.assemble_add(&local[..n * n], &dofs, &dofs).expect("dofs in range");
    }
    coo.to_csr()
}

/// Mass and stiffness blocks of one formulation in field order.
#[derive(Debug, Clone)]
pub struct FormBlocks {
    pub formulation: Formulation,
    pub mass: BlockMatrix,
    pub stiffness: BlockMatrix,
    /// Per field: true for rows without a time derivative.
    pub algebraic: Vec<bool>,
    pub sizes: Vec<usize>,
}

impl FormBlocks {
    /// Per-dof algebraic flags.
    pub fn algebraic_rows(&self) -> Vec<bool> {
        self.sizes.iter().zip(&self.algebraic).flat_map(|(&n, &a)| std::iter::repeat_n(a, n)).collect()
    }
}

fn check_compatible(spaces: &FieldSpaces, params: &MpetParameters, total: bool) -> Result<(), FormError> {
    params.validate()?;
    if spaces.total_pressure != total {
        return Err(FormError::Mismatch(format!(
            "{} spaces supplied to the {} formulation",
            if spaces.total_pressure { "total-pressure" } else { "standard" },
            if total { "total-pressure" } else { "standard" }
        )));
    }
    if spaces.networks() != params.networks() {
        return Err(FormError::Mismatch(format!(
            "{} pressure spaces but {} networks in the parameters",
            spaces.networks(),
            params.networks()
        )));
    }
    if spaces.spaces[1..].iter().any(|s| s.num_nodes() != spaces.spaces[1].num_nodes() || s.degree() != 1) {
        return Err(FormError::Mismatch("pressure spaces must share one degree-1 node set".into()));
    }
    Ok(())
}

/// Network pressure stiffness `K_j L + sum_i xi_ji M` and off-diagonal transfer blocks.
fn add_network_blocks(k: &mut BlockMatrix, q: &FESpace, params: &MpetParameters, m: &CsrMatrix, first: usize) {
    let a = params.networks();
    let const_l =
        params.k.iter().all(|k| k.constant().is_some()).then(|| assemble_laplace(q, &Conductivity::Constant(1.0)));
    for j in 0..a {
        let lj = match (&const_l, params.k[j].constant()) {
            (Some(l), Some(kj)) => l.scaled(kj),
            _ => assemble_laplace(q, &params.k[j]),
        };
        let exchange: f64 = (0..a).filter(|&i| i != j).map(|i| params.xi[j][i]).sum();
        let diag = if exchange != 0.0 { lj.add(1.0, m, exchange) } else { lj };
        k.add_to(first + j, first + j, &diag, 1.0);
        for i in (0..a).filter(|&i| i != j && params.xi[j][i] != 0.0) {
            k.add_to(first + j, first + i, m, -params.xi[j][i]);
        }
    }
}

/// Blocks of the total-pressure formulation, fields `(u, p0, p1..pA)`.
pub fn total_pressure_forms(spaces: &FieldSpaces, params: &MpetParameters) -> Result<FormBlocks, FormError> {
    check_compatible(spaces, params, true)?;
    let a = params.networks();
    let v = spaces.displacement();
    let q = &spaces.spaces[1];
    let sizes = spaces.sizes();
    let inv_lam = 1.0 / params.lam;
    let alpha = &params.alpha;

    let ae = assemble_elasticity(v, params.mu);
    let b = assemble_divergence(q, v);
    let m = assemble_mass(q);

    let mut k = BlockMatrix::new(sizes.clone(), sizes.clone());
    k.set(0, 0, ae);
    k.set(0, 1, b.transpose());
    k.set(1, 0, b);
    k.set(1, 1, m.scaled(-inv_lam));
    for j in 0..a {
        k.set(1, 2 + j, m.scaled(-inv_lam * alpha[j]));
    }
    add_network_blocks(&mut k, q, params, &m, 2);

    let mut mass = BlockMatrix::new(sizes.clone(), sizes.clone());
    for j in 0..a {
        mass.set(2 + j, 1, m.scaled(alpha[j] * inv_lam));
        for i in 0..a {
            let cji = if i == j { params.c[j] } else { 0.0 } + alpha[j] * alpha[i] * inv_lam;
            mass.set(2 + j, 2 + i, m.scaled(cji));
        }
    }
    let mut algebraic = vec![false; a + 2];
    algebraic[0] = true;
    algebraic[1] = true;
    Ok(FormBlocks { formulation: Formulation::TotalPressure, mass, stiffness: k, algebraic, sizes })
}

/// Blocks of the standard two-field formulation, fields `(u, p1..pA)`.
pub fn standard_forms(spaces: &FieldSpaces, params: &MpetParameters) -> Result<FormBlocks, FormError> {
    check_compatible(spaces, params, false)?;
    let a = params.networks();
    let v = spaces.displacement();
    let q = &spaces.spaces[1];
    let sizes = spaces.sizes();
    let alpha = &params.alpha;

    let ae = assemble_elasticity(v, params.mu);
    let d = assemble_grad_div(v);
    let b = assemble_divergence(q, v);
    let bt = b.transpose();
    let m = assemble_mass(q);

    let mut k = BlockMatrix::new(sizes.clone(), sizes.clone());
    k.set(0, 0, ae.add(1.0, &d, params.lam));
    for j in 0..a {
        k.set(0, 1 + j, bt.scaled(-alpha[j]));
    }
    add_network_blocks(&mut k, q, params, &m, 1);

    let mut mass = BlockMatrix::new(sizes.clone(), sizes.clone());
    for j in 0..a {
        mass.set(1 + j, 0, b.scaled(alpha[j]));
        mass.set(1 + j, 1 + j, m.scaled(params.c[j]));
    }
    let mut algebraic = vec![false; a + 1];
    algebraic[0] = true;
    Ok(FormBlocks { formulation: Formulation::Standard, mass, stiffness: k, algebraic, sizes })
}

/// Row-wise combination `diag(wm) M + diag(wk) K`.
fn row_combination(m: &CsrMatrix, wm: &[f64], k: &CsrMatrix, wk: &[f64]) -> CsrMatrix {
    let scale = |a: &CsrMatrix, w: &[f64]| {
        let mut out = a.clone();
        for i in 0..out.nrows {
            for p in out.row_ptr[i]..out.row_ptr[i + 1] {
                out.values[p] *= w[i];
            }
        }
        out
    };
    scale(m, wm).add(1.0, &scale(k, wk), 1.0)
}

/// One θ-step `lhs y^{n+1} = history y^n + s_next F^{n+1} + s_prev F^n`.
///
/// Algebraic rows are θ-averaged and divided by θ; dynamic rows use a
/// backward difference for the derivative and are multiplied by `-dt`.
#[derive(Debug, Clone)]
pub struct ThetaOperator {
    pub forms: FormBlocks,
    pub dt: f64,
    pub theta: f64,
    pub lhs: CsrMatrix,
    pub history: CsrMatrix,
    pub next_scale: Vec<f64>,
    pub prev_scale: Vec<f64>,
}

impl ThetaOperator {
    pub fn new(forms: FormBlocks, dt: f64, theta: f64) -> Result<Self, FormError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(FormError::Time(format!("dt = {dt} must be positive")));
        }
        if !(0.5..=1.0).contains(&theta) {
            return Err(FormError::Time(format!("theta = {theta} must lie in [1/2, 1]")));
        }
        let alg = forms.algebraic_rows();
        let m = forms.mass.to_csr();
        let k = forms.stiffness.to_csr();
        let r = (1.0 - theta) / theta;
        let pick = |a: f64, d: f64| alg.iter().map(|&is| if is { a } else { d }).collect::<Vec<f64>>();
        let lhs = row_combination(&m, &pick(0.0, -1.0), &k, &pick(1.0, -theta * dt));
        let history = row_combination(&m, &pick(0.0, -1.0), &k, &pick(-r, (1.0 - theta) * dt));
        let next_scale = pick(1.0, -dt * theta);
        let prev_scale = pick(r, -dt * (1.0 - theta));
        Ok(ThetaOperator { forms, dt, theta, lhs, history, next_scale, prev_scale })
    }

    pub fn dim(&self) -> usize {
        self.lhs.nrows
    }

    pub fn rhs(&self, load_next: &[f64], load_prev: &[f64], prev: &[f64]) -> Vec<f64> {
        let mut out = self.history.matvec(prev);
        for i in 0..out.len() {
            out[i] += self.next_scale[i] * load_next[i] + self.prev_scale[i] * load_prev[i];
        }
        out
    }
}

pub fn assemble_total_pressure_operator(
    spaces: &FieldSpaces,
    params: &MpetParameters,
    dt: f64,
    theta: f64,
) -> Result<ThetaOperator, FormError> {
    ThetaOperator::new(total_pressure_forms(spaces, params)?, dt, theta)
}

pub fn assemble_standard_operator(
    spaces: &FieldSpaces,
    params: &MpetParameters,
    dt: f64,
    theta: f64,
) -> Result<ThetaOperator, FormError> {
    ThetaOperator::new(standard_forms(spaces, params)?, dt, theta)
}

pub type VectorFn = Arc<dyn Fn(Point, f64) -> [f64; 2] + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>;

/// Body force, network sources and normal boundary stresses.
///
/// `None` entries are zero. A normal stress `s` on a tag imposes total
/// traction `s n` there.
#[derive(Clone, Default)]
pub struct SourceData {
    pub f: Option<VectorFn>,
    pub g: Vec<Option<ScalarFn>>,
    pub normal_stress: Vec<(u32, ScalarFn)>,
}

impl SourceData {
    pub fn zero(networks: usize) -> Self {
        SourceData { f: None, g: vec![None; networks], normal_stress: Vec::new() }
    }
}

impl fmt::Debug for SourceData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SourceData")
            .field("f", &self.f.is_some())
            .field("g", &self.g.iter().map(Option::is_some).collect::<Vec<_>>())
            .field("normal_stress_tags", &self.normal_stress.iter().map(|s| s.0).collect::<Vec<_>>())
            .finish()
    }
}

/// Outward unit normals of the boundary facets.
pub fn facet_normals(mesh: &Mesh) -> Vec<[f64; 2]> {
    let topo = mesh.edge_topology();
    let mut owner = vec![usize::MAX; topo.edges.len()];
    for (c, ce) in topo.cell_edges.iter().enumerate() {
        for &e in ce {
            owner[e] = c;
        }
    }
    mesh.facets
        .iter()
        .map(|&[a, b]| {
            let e = topo.find(a, b).expect("facet is an edge");
            let cell = mesh.cells[owner[e]];
            let other = *cell.iter().find(|&&v| v != a && v != b).expect("triangle");
            let (pa, pb, po) = (mesh.vertices[a], mesh.vertices[b], mesh.vertices[other]);
            let t = [pb[0] - pa[0], pb[1] - pa[1]];
            let len = (t[0] * t[0] + t[1] * t[1]).sqrt();
            let mut n = [t[1] / len, -t[0] / len];
            if n[0] * (po[0] - pa[0]) + n[1] * (po[1] - pa[1]) > 0.0 {
                n = [-n[0], -n[1]];
            }
            n
        })
        .collect()
}

const GAUSS4: [(f64, f64); 4] = [
    (0.069_431_844_202_973_71, 0.173_927_422_568_726_93),
    (0.330_009_478_207_571_87, 0.326_072_577_431_273_07),
    (0.669_990_521_792_428_1, 0.326_072_577_431_273_07),
    (0.930_568_155_797_026_3, 0.173_927_422_568_726_93),
];

/// Load vector `F(t)` in field order and physical sign.
pub fn assemble_load(spaces: &FieldSpaces, sources: &SourceData, t: f64) -> Result<Vec<f64>, FormError> {
    let off = spaces.offsets();
    let mut out = vec![0.0; spaces.total_dofs()];
    let v = spaces.displacement();
    let mesh = &v.mesh;
    if let Some(f) = &sources.f {
        let tv = tab(v.degree(), SOURCE_DEGREE);
        let mut bad = false;
        for_each_qp(mesh, tv.rule.points.len(), &tv.rule.weights, |c, q, geo, dx| {
            let val = f(geo.map(tv.rule.points[q]), t);
            bad |= !val.iter().all(|x| x.is_finite());
            for (a, &node) in v.cell_nodes(c).iter().enumerate() {
                for k in 0..2 {
                    out[off[0] + 2 * node + k] += dx * tv.values[q][a] * val[k];
                }
            }
        });
        if bad {
            return Err(FormError::NonFinite { what: "body force".into(), t });
        }
    }
    if !sources.normal_stress.is_empty() {
        let normals = facet_normals(mesh);
        for (tag, s) in &sources.normal_stress {
            for (fi, (&[a, b], &ftag)) in mesh.facets.iter().zip(&mesh.facet_tags).enumerate() {
                if ftag != *tag {
                    continue;
                }
                let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
                let len = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
                let nodes = v.facet_nodes(fi);
                for &(sq, w) in &GAUSS4 {
                    let x = [pa[0] + sq * (pb[0] - pa[0]), pa[1] + sq * (pb[1] - pa[1])];
                    let sv = s(x, t);
                    if !sv.is_finite() {
                        return Err(FormError::NonFinite { what: format!("normal stress on tag {tag}"), t });
                    }
                    let basis = [(1.0 - sq) * (1.0 - 2.0 * sq), sq * (2.0 * sq - 1.0), 4.0 * sq * (1.0 - sq)];
                    for (k, &node) in nodes.iter().enumerate() {
                        for comp in 0..2 {
                            out[off[0] + 2 * node + comp] += w * len * sv * normals[fi][comp] * basis[k];
                        }
                    }
                }
            }
        }
    }
    for (j, g) in sources.g.iter().enumerate() {
        let Some(g) = g else { continue };
        let field = spaces.pressure_field(j + 1);
        let s = &spaces.spaces[field];
        let ts = tab(s.degree(), SOURCE_DEGREE);
        let mut bad = false;
        for_each_qp(mesh, ts.rule.points.len(), &ts.rule.weights, |c, q, geo, dx| {
            let val = g(geo.map(ts.rule.points[q]), t);
            bad |= !val.is_finite();
            for (a, &node) in s.cell_nodes(c).iter().enumerate() {
                out[off[field] + node] += dx * ts.values[q][a] * val;
            }
        });
        if bad {
            return Err(FormError::NonFinite { what: format!("source g_{}", j + 1), t });
        }
    }
    Ok(out)
}

/// Energy `|eps(u)|^2_{2mu} + sum_j |p_j|^2_{c_j} + |alpha . p|^2_{1/lambda}`
/// evaluated exactly with assembled matrices.
#[derive(Debug, Clone)]
pub struct EnergyOperator {
    formulation: Formulation,
    lam: f64,
    alpha: Vec<f64>,
    c: Vec<f64>,
    elasticity: CsrMatrix,
    grad_div: Option<CsrMatrix>,
    mass: CsrMatrix,
    offsets: Vec<usize>,
}

impl EnergyOperator {
    pub fn new(spaces: &FieldSpaces, params: &MpetParameters) -> Self {
        let v = spaces.displacement();
        let formulation = if spaces.total_pressure { Formulation::TotalPressure } else { Formulation::Standard };
        EnergyOperator {
            formulation,
            lam: params.lam,
            alpha: params.alpha.clone(),
            c: params.c.clone(),
            elasticity: assemble_elasticity(v, params.mu),
            grad_div: (!spaces.total_pressure).then(|| assemble_grad_div(v)),
            mass: assemble_mass(&spaces.spaces[1]),
            offsets: spaces.offsets(),
        }
    }

    fn quad(a: &CsrMatrix, x: &[f64]) -> f64 {
        a.matvec(x).iter().zip(x).map(|(p, q)| p * q).sum()
    }

    pub fn energy(&self, y: &[f64]) -> f64 {
        let o = &self.offsets;
        let u = &y[o[0]..o[1]];
        let mut e = Self::quad(&self.elasticity, u);
        let first = if self.formulation == Formulation::TotalPressure { 2 } else { 1 };
        for (j, &c) in self.c.iter().enumerate() {
            let p = &y[o[first + j]..o[first + j + 1]];
            if c != 0.0 {
                e += c * Self::quad(&self.mass, p);
            }
        }
        match (&self.grad_div, self.formulation) {
            (Some(d), Formulation::Standard) => e += self.lam * Self::quad(d, u),
            _ => {
                let mut ap = y[o[1]..o[2]].to_vec();
                for (j, &a) in self.alpha.iter().enumerate() {
                    for (s, &p) in ap.iter_mut().zip(&y[o[2 + j]..o[3 + j]]) {
                        *s += a * p;
                    }
                }
                e += Self::quad(&self.mass, &ap) / self.lam;
            }
        }
        e
    }
}
