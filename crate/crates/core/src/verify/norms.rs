//! Error norms and weighted norms evaluated by degree-6 quadrature.

use crate::elements::{quadrature, CellGeometry, Tabulation, MAX_NODES};
use crate::forms::SOURCE_DEGREE;
use crate::mesh::Point;
use crate::spaces::FEFunction;

/// Value and gradient rows (`grad[k] = ∇f_k`) of a field with up to two components.
pub type Sample = ([f64; 2], [[f64; 2]; 2]);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    pub h1_semi: f64,
    pub h1: f64,
}

pub(crate) fn tabulation(f: &FEFunction) -> Tabulation {
    Tabulation::new(f.space.element, quadrature(SOURCE_DEGREE).expect("degree 6 rule"))
}

/// Value and gradient of `f` at quadrature point `q` of cell `c`.
pub(crate) fn sample(f: &FEFunction, t: &Tabulation, c: usize, q: usize, geo: &CellGeometry) -> Sample {
    let g = t.physical_grads(q, geo);
    let vs = f.space.value_size;
    let mut val = [0.0; 2];
    let mut grad = [[0.0; 2]; 2];
    for (a, &node) in f.space.cell_nodes(c).iter().enumerate().take(MAX_NODES) {
        for k in 0..vs {
            let coef = f.coefficients[node * vs + k];
            val[k] += coef * t.values[q][a];
            grad[k][0] += coef * g[a][0];
            grad[k][1] += coef * g[a][1];
        }
    }
    (val, grad)
}

/// `‖f − exact‖` in L², the H¹ seminorm and the full H¹ norm.
///
/// `exact` returns values and gradients; only the first `value_size`
/// components are compared.
pub fn error_norms(numeric: &FEFunction, exact: impl Fn(Point) -> Sample) -> ErrorNorms {
    let t = tabulation(numeric);
    let vs = numeric.space.value_size;
    let (mut l2, mut semi) = (0.0, 0.0);
    for c in 0..numeric.space.mesh.num_cells() {
        let geo = numeric.space.geometry(c);
        for q in 0..t.rule.points.len() {
            let dx = t.rule.weights[q] * geo.det.abs();
            let (v, g) = sample(numeric, &t, c, q, &geo);
            let (ev, eg) = exact(geo.map(t.rule.points[q]));
            for k in 0..vs {
                l2 += dx * (v[k] - ev[k]).powi(2);
                semi += dx * ((g[k][0] - eg[k][0]).powi(2) + (g[k][1] - eg[k][1]).powi(2));
            }
        }
    }
    ErrorNorms { l2: l2.sqrt(), h1_semi: semi.sqrt(), h1: (l2 + semi).sqrt() }
}

/// Scalar convenience wrapper of [`error_norms`].
pub fn scalar_error_norms(numeric: &FEFunction, exact: impl Fn(Point) -> (f64, [f64; 2])) -> ErrorNorms {
    error_norms(numeric, |x| {
        let (v, g) = exact(x);
        ([v, 0.0], [g, [0.0; 2]])
    })
}

/// Norm of `a − b` for two discrete fields on the same mesh and element.
pub fn difference_norms(a: &FEFunction, b: &FEFunction) -> ErrorNorms {
    let combo = Combination::new(&[(a, 1.0), (b, -1.0)]);
    let l2 = weighted_norm(&combo, |_| 1.0, Quantity::Value);
    let semi = weighted_norm(&combo, |_| 1.0, Quantity::Gradient);
    ErrorNorms { l2, h1_semi: semi, h1: l2.hypot(semi) }
}

/// Which derivative of the field enters a weighted norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Value,
    Gradient,
    /// Symmetric gradient `ε(u)` of a vector field.
    Strain,
}

/// Linear combination `Σ coef_k f_k` of fields sharing mesh, element and
/// value size, e.g. `α·p = p0 + Σ α_j p_j`.
#[derive(Debug, Clone)]
pub struct Combination<'a> {
    terms: Vec<(&'a FEFunction, f64)>,
}

impl<'a> Combination<'a> {
    pub fn new(terms: &[(&'a FEFunction, f64)]) -> Self {
        let first = terms.first().expect("at least one term").0;
        for (f, _) in terms {
            assert_eq!(f.space.element, first.space.element, "mixed elements in a combination");
            assert_eq!(f.space.value_size, first.space.value_size, "mixed value sizes in a combination");
            assert_eq!(f.space.mesh.num_cells(), first.space.mesh.num_cells(), "mixed meshes in a combination");
        }
        Combination { terms: terms.to_vec() }
    }

    pub fn single(f: &'a FEFunction) -> Self {
        Combination { terms: vec![(f, 1.0)] }
    }
}

/// `‖v‖_w = ⟨w v, v⟩^{1/2}` for the chosen quantity of the combination.
pub fn weighted_norm(field: &Combination<'_>, weight: impl Fn(Point) -> f64, quantity: Quantity) -> f64 {
    let first = field.terms[0].0;
    let t = tabulation(first);
    let mut sum = 0.0;
    for c in 0..first.space.mesh.num_cells() {
        let geo = first.space.geometry(c);
        for q in 0..t.rule.points.len() {
            let w = weight(geo.map(t.rule.points[q]));
            if w == 0.0 {
                continue;
            }
            let mut v = [0.0; 2];
            let mut g = [[0.0; 2]; 2];
            for &(f, coef) in &field.terms {
                let (fv, fg) = sample(f, &t, c, q, &geo);
                for k in 0..2 {
                    v[k] += coef * fv[k];
                    g[k][0] += coef * fg[k][0];
                    g[k][1] += coef * fg[k][1];
                }
            }
            let local = match quantity {
                Quantity::Value => v[0] * v[0] + v[1] * v[1],
                Quantity::Gradient => g.iter().flatten().map(|x| x * x).sum(),
                Quantity::Strain => {
                    let off = 0.5 * (g[0][1] + g[1][0]);
                    g[0][0] * g[0][0] + g[1][1] * g[1][1] + 2.0 * off * off
                }
            };
            sum += t.rule.weights[q] * geo.det.abs() * w * local;
        }
    }
    sum.sqrt()
}
