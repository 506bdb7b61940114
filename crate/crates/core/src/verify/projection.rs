//! Stokes-type interpolant, weighted elliptic projection and static solves
//! of the displacement/total-pressure block.

use std::sync::Arc;

use crate::forms::{assemble_divergence, assemble_elasticity, assemble_laplace, assemble_mass, VectorFn};
use crate::linalg::{CsrMatrix, DirichletElimination, Factorized, LinalgError};
use crate::mesh::Point;
use crate::params::Conductivity;
use crate::spaces::{interpolate_scalar, interpolate_vector, FEFunction, FESpace};

use super::norms::{sample, tabulation, Sample};

/// True if the displacement is prescribed on every boundary facet, which
/// leaves the pressure determined only up to a constant.
fn clamped_everywhere(v: &FESpace) -> bool {
    v.mesh.facet_tags.iter().all(|t| v.constrained_tags.contains(t))
}

/// `∫ φ_i` for every basis function of a scalar space.
fn basis_integrals(q: &FESpace) -> Vec<f64> {
    let m = assemble_mass(q);
    (0..m.nrows).map(|i| m.row(i).map(|(_, v)| v).sum()).collect()
}

/// Appends one border row and column `m` to a square matrix.
fn with_border(a: &CsrMatrix, border: &[(usize, f64)]) -> CsrMatrix {
    let n = a.nrows;
    let mut t: Vec<(usize, usize, f64)> = (0..n).flat_map(|i| a.row(i).map(move |(j, v)| (i, j, v))).collect();
    for &(i, v) in border {
        t.push((i, n, v));
        t.push((n, i, v));
    }
    CsrMatrix::from_triplets(n + 1, n + 1, &t).expect("indices in range")
}

/// Solves `[A, Bᵀ; B, -C] (u, p) = (ru, rq)` with the displacement fixed to
/// `u_bc` on constrained dofs.
///
/// `c` is `None` for the pure Stokes block; `mean` pins `∫ p` through a
/// Lagrange multiplier when given. Returns `(u, p, relative residual)`.
#[allow(clippy::too_many_arguments)]
fn solve_saddle(
    v: &Arc<FESpace>,
    q: &Arc<FESpace>,
    mu: f64,
    c: Option<&CsrMatrix>,
    ru: &[f64],
    rq: &[f64],
    u_bc: &[f64],
    mean: Option<f64>,
) -> Result<(FEFunction, FEFunction, f64), LinalgError> {
    let (nv, nq) = (v.ndofs(), q.ndofs());
    let a = assemble_elasticity(v, mu);
    let b = assemble_divergence(q, v);
    let mut t: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..nv {
        t.extend(a.row(i).map(|(j, x)| (i, j, x)));
    }
    for i in 0..nq {
        for (j, x) in b.row(i) {
            t.push((nv + i, j, x));
            t.push((j, nv + i, x));
        }
        if let Some(c) = c {
            t.extend(c.row(i).map(|(j, x)| (nv + i, nv + j, -x)));
        }
    }
    let mut k = CsrMatrix::from_triplets(nv + nq, nv + nq, &t)?;
    let mut rhs: Vec<f64> = ru.iter().chain(rq).copied().collect();
    if let Some(target) = mean {
        let w = basis_integrals(q);
        let border: Vec<(usize, f64)> = w.iter().enumerate().map(|(i, &x)| (nv + i, x)).collect();
        k = with_border(&k, &border);
        rhs.push(target);
    }
    let n = k.nrows;
    let mut values = vec![0.0; n];
    values[..nv].copy_from_slice(u_bc);
    let elim = DirichletElimination::new(&k, v.constrained_dofs());
    elim.apply(&mut rhs, &values);
    let (x, rel) = Factorized::new(elim.matrix)?.solve(&rhs)?;
    let u = FEFunction::from_coefficients(v.clone(), x[..nv].to_vec());
    let p = FEFunction::from_coefficients(q.clone(), x[nv..nv + nq].to_vec());
    Ok((u, p, rel))
}

/// Load vectors `(⟨2μ ε(u), ε(v)⟩ + ⟨p0, div v⟩, ⟨div u, q⟩)` from exact data.
fn stokes_rhs(
    v: &Arc<FESpace>,
    q: &Arc<FESpace>,
    mu: f64,
    u: &dyn Fn(Point) -> Sample,
    p0: &dyn Fn(Point) -> f64,
) -> (Vec<f64>, Vec<f64>) {
    let vf = FEFunction::zeros(v.clone());
    let qf = FEFunction::zeros(q.clone());
    let tv = tabulation(&vf);
    let tq = tabulation(&qf);
    let mut ru = vec![0.0; v.ndofs()];
    let mut rq = vec![0.0; q.ndofs()];
    for c in 0..v.mesh.num_cells() {
        let geo = v.geometry(c);
        for k in 0..tv.rule.points.len() {
            let dx = tv.rule.weights[k] * geo.det.abs();
            let x = geo.map(tv.rule.points[k]);
            let (_, g) = u(x);
            let p = p0(x);
            let eps = [[g[0][0], 0.5 * (g[0][1] + g[1][0])], [0.5 * (g[0][1] + g[1][0]), g[1][1]]];
            let div = g[0][0] + g[1][1];
            let grads = tv.physical_grads(k, &geo);
            for (a, &node) in v.cell_nodes(c).iter().enumerate() {
                for ci in 0..2 {
                    let strain = eps[ci][0] * grads[a][0] + eps[ci][1] * grads[a][1];
                    ru[2 * node + ci] += dx * (2.0 * mu * strain + p * grads[a][ci]);
                }
            }
            for (a, &node) in q.cell_nodes(c).iter().enumerate() {
                rq[node] += dx * div * tq.values[k][a];
            }
        }
    }
    (ru, rq)
}

/// Stokes-type interpolant `(Π_V u, Π_Q0 p0)`:
/// `⟨2μ ε(Πu), ε(v)⟩ + ⟨Πp0, div v⟩ = ⟨2μ ε(u), ε(v)⟩ + ⟨p0, div v⟩` and
/// `⟨div Πu, q⟩ = ⟨div u, q⟩`, with `Πu` equal to the nodal interpolant of
/// `u` on constrained dofs.
///
/// When the displacement is clamped on the whole boundary the pressure is
/// fixed by matching the mean of `p0`.
pub fn stokes_interpolant(
    v: &Arc<FESpace>,
    q: &Arc<FESpace>,
    mu: f64,
    u_exact: impl Fn(Point) -> Sample,
    p0_exact: impl Fn(Point) -> f64,
) -> Result<(FEFunction, FEFunction), LinalgError> {
    let (ru, rq) = stokes_rhs(v, q, mu, &u_exact, &p0_exact);
    let u_bc = interpolate_vector(v, |x| u_exact(x).0).coefficients;
    let mean = clamped_everywhere(v).then(|| domain_integral(q, &p0_exact));
    let (u, p, _) = solve_saddle(v, q, mu, None, &ru, &rq, &u_bc, mean)?;
    Ok((u, p))
}

fn domain_integral(s: &Arc<FESpace>, f: &dyn Fn(Point) -> f64) -> f64 {
    let zero = FEFunction::zeros(s.clone());
    let t = tabulation(&zero);
    let mut sum = 0.0;
    for c in 0..s.mesh.num_cells() {
        let geo = s.geometry(c);
        for k in 0..t.rule.points.len() {
            sum += t.rule.weights[k] * geo.det.abs() * f(geo.map(t.rule.points[k]));
        }
    }
    sum
}

/// Weighted elliptic projection `⟨K ∇Πp, ∇q⟩ = ⟨K ∇p, ∇q⟩`, with `Πp` equal
/// to the nodal interpolant on constrained dofs (or matching the mean of
/// `p` when nothing is constrained).
pub fn elliptic_projection(
    s: &Arc<FESpace>,
    k: &Conductivity,
    p_exact: impl Fn(Point) -> (f64, [f64; 2]),
) -> Result<FEFunction, LinalgError> {
    let lap = assemble_laplace(s, k);
    let zero = FEFunction::zeros(s.clone());
    let t = tabulation(&zero);
    let mut rhs = vec![0.0; s.ndofs()];
    for c in 0..s.mesh.num_cells() {
        let geo = s.geometry(c);
        for q in 0..t.rule.points.len() {
            let x = geo.map(t.rule.points[q]);
            let dx = t.rule.weights[q] * geo.det.abs() * k.at(x);
            let (_, g) = p_exact(x);
            let grads = t.physical_grads(q, &geo);
            for (a, &node) in s.cell_nodes(c).iter().enumerate() {
                rhs[node] += dx * (g[0] * grads[a][0] + g[1] * grads[a][1]);
            }
        }
    }
    let bc = interpolate_scalar(s, |x| p_exact(x).0).coefficients;
    let n = s.ndofs();
    let (matrix, mut values) = if s.constrained_dofs().is_empty() {
        let w = basis_integrals(s);
        let border: Vec<(usize, f64)> = w.into_iter().enumerate().collect();
        rhs.push(domain_integral(s, &|x| p_exact(x).0));
        (with_border(&lap, &border), vec![0.0; n + 1])
    } else {
        (lap, bc)
    };
    values.resize(matrix.nrows, 0.0);
    let elim = DirichletElimination::new(&matrix, s.constrained_dofs());
    elim.apply(&mut rhs, &values);
    let (x, _) = Factorized::new(elim.matrix)?.solve(&rhs)?;
    Ok(FEFunction::from_coefficients(s.clone(), x[..n].to_vec()))
}

/// One static solve of the displacement/total-pressure block
/// `⟨2μ ε(u), ε(v)⟩ + ⟨p0, div v⟩ = ⟨f, v⟩`,
/// `⟨div u, q⟩ − λ⁻¹⟨p0, q⟩ = 0`, with homogeneous displacement data.
///
/// `lam = None` is the incompressible Stokes limit (pressure mean zero when
/// the displacement is clamped everywhere). Returns `(u, p0, residual)`.
pub fn static_solve(
    v: &Arc<FESpace>,
    q: &Arc<FESpace>,
    mu: f64,
    lam: Option<f64>,
    f: &VectorFn,
) -> Result<(FEFunction, FEFunction, f64), LinalgError> {
    let vf = FEFunction::zeros(v.clone());
    let t = tabulation(&vf);
    let mut ru = vec![0.0; v.ndofs()];
    for c in 0..v.mesh.num_cells() {
        let geo = v.geometry(c);
        for k in 0..t.rule.points.len() {
            let dx = t.rule.weights[k] * geo.det.abs();
            let val = f(geo.map(t.rule.points[k]), 0.0);
            for (a, &node) in v.cell_nodes(c).iter().enumerate() {
                for ci in 0..2 {
                    ru[2 * node + ci] += dx * t.values[k][a] * val[ci];
                }
            }
        }
    }
    let rq = vec![0.0; q.ndofs()];
    let c = lam.map(|l| assemble_mass(q).scaled(1.0 / l));
    let mean = (lam.is_none() && clamped_everywhere(v)).then_some(0.0);
    solve_saddle(v, q, mu, c.as_ref(), &ru, &rq, &vec![0.0; v.ndofs()], mean)
}

/// Value and gradient of a discrete field at an arbitrary point, so a
/// discrete field can stand in for exact data.
pub fn discrete_sample(f: &FEFunction, x: Point) -> Sample {
    let (c, _) = f.space.locate(x).expect("point inside mesh");
    let geo = f.space.geometry(c);
    let b = geo.barycentric(x);
    let t = crate::elements::Tabulation::new(
        f.space.element,
        crate::elements::QuadratureRule { degree: 0, points: vec![b], weights: vec![0.5] },
    );
    sample(f, &t, c, 0, &geo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_unit_square_mesh, WHOLE};
    use crate::verify::manufactured::example1_case;
    use crate::verify::norms::{difference_norms, error_norms, scalar_error_norms};

    fn spaces(n: usize) -> (Arc<FESpace>, Arc<FESpace>) {
        let mesh = Arc::new(build_unit_square_mesh(n));
        (
            Arc::new(FESpace::new(mesh.clone(), 2, 2, &[WHOLE]).unwrap()),
            Arc::new(FESpace::new(mesh, 1, 1, &[]).unwrap()),
        )
    }

    #[test]
    fn stokes_interpolant_reproduces_discrete_fields() {
        let (v, q) = spaces(4);
        let bubble = |x: Point| x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]);
        let uh = interpolate_vector(&v, |x| [bubble(x), -2.0 * bubble(x)]);
        let ph = interpolate_scalar(&q, |x| x[0] - 0.5 + 0.3 * x[1]);
        let (pu, pp) =
            stokes_interpolant(&v, &q, 0.7, |x| discrete_sample(&uh, x), |x| discrete_sample(&ph, x).0[0]).unwrap();
        assert!(difference_norms(&pu, &uh).h1 < 1e-10);
        assert!(difference_norms(&pp, &ph).l2 < 1e-10);
    }

    #[test]
    fn stokes_interpolant_divergence_moments() {
        let (v, q) = spaces(4);
        let case = example1_case(0.49999, 1.0);
        let e = case.exact.clone();
        let (pu, _) = stokes_interpolant(
            &v,
            &q,
            case.params.mu,
            |x| e.u_value_grad(x, 0.5),
            |x| e.p0_value_grad(&case.params, x, 0.5).0,
        )
        .unwrap();
        let b = assemble_divergence(&q, &v);
        let lhs = b.matvec(&pu.coefficients);
        let (_, rq) = stokes_rhs(&v, &q, 1.0, &|x| e.u_value_grad(x, 0.5), &|_| 0.0);
        for (a, r) in lhs.iter().zip(&rq) {
            assert!((a - r).abs() < 1e-10);
        }
    }

    #[test]
    fn stokes_interpolant_converges_at_order_two() {
        let case = example1_case(0.49999, 1.0);
        let e = case.exact.clone();
        let mut errs = Vec::new();
        for n in [4, 8, 16] {
            let (v, q) = spaces(n);
            let (pu, _) = stokes_interpolant(
                &v,
                &q,
                case.params.mu,
                |x| e.u_value_grad(x, 0.5),
                |x| e.p0_value_grad(&case.params, x, 0.5).0,
            )
            .unwrap();
            errs.push(error_norms(&pu, |x| e.u_value_grad(x, 0.5)).h1);
        }
        let rate = (errs[1] / errs[2]).log2();
        assert!((rate - 2.0).abs() < 0.2, "{errs:?}");
    }

    #[test]
    fn elliptic_projection_properties() {
        let mesh = Arc::new(build_unit_square_mesh(4));
        let s = Arc::new(FESpace::new(mesh, 1, 1, &[WHOLE]).unwrap());
        let ph = interpolate_scalar(&s, |x| x[0] * x[1] * (1.0 - x[0]));
        let back = elliptic_projection(&s, &Conductivity::Constant(1.0), |x| {
            let (v, g) = discrete_sample(&ph, x);
            (v[0], g[0])
        })
        .unwrap();
        assert!(difference_norms(&back, &ph).h1 < 1e-10);

        let e = example1_case(0.49999, 1.0).exact;
        let p1 = elliptic_projection(&s, &Conductivity::Constant(1.0), |x| e.p_value_grad(1, x, 0.5)).unwrap();
        let p10 = elliptic_projection(&s, &Conductivity::Constant(10.0), |x| e.p_value_grad(1, x, 0.5)).unwrap();
        assert!(difference_norms(&p1, &p10).h1 < 1e-12);
    }

    #[test]
    fn elliptic_projection_rates_and_mean_mode() {
        let e = example1_case(0.49999, 1.0).exact;
        let mut errs = Vec::new();
        for n in [8, 16, 32] {
            let mesh = Arc::new(build_unit_square_mesh(n));
            let s = Arc::new(FESpace::new(mesh, 1, 1, &[WHOLE]).unwrap());
            let p = elliptic_projection(&s, &Conductivity::Constant(1.0), |x| e.p_value_grad(1, x, 0.5)).unwrap();
            errs.push(scalar_error_norms(&p, |x| e.p_value_grad(1, x, 0.5)));
        }
        assert!(((errs[1].l2 / errs[2].l2).log2() - 2.0).abs() < 0.1);
        assert!(((errs[1].h1 / errs[2].h1).log2() - 1.0).abs() < 0.1);

        let mesh = Arc::new(build_unit_square_mesh(4));
        let free = Arc::new(FESpace::new(mesh, 1, 1, &[]).unwrap());
        let lin = |x: Point| (x[0] + 2.0 * x[1], [1.0, 2.0]);
        let p = elliptic_projection(&free, &Conductivity::Constant(1.0), lin).unwrap();
        assert!(scalar_error_norms(&p, lin).h1 < 1e-10);
    }

    #[test]
    fn static_solves_approach_stokes() {
        let (v, q) = spaces(4);
        let f: VectorFn = Arc::new(|x: Point, _| [(std::f64::consts::PI * x[1]).sin(), x[0] * (1.0 - x[0])]);
        let (us, _, _) = static_solve(&v, &q, 1.0, None, &f).unwrap();
        let mut last = f64::INFINITY;
        for lam in [1e3, 1e5, 1e7] {
            let (u, _, rel) = static_solve(&v, &q, 1.0, Some(lam), &f).unwrap();
            assert!(rel <= 1e-10);
            let d = difference_norms(&u, &us).h1;
            assert!(d < last, "{lam}: {d} vs {last}");
            last = d;
        }
    }
}
