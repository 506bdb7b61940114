//! Lagrange basis functions on the reference triangle and quadrature rules.
//!
//! Points are given in barycentric coordinates `(l0, l1, l2)`. The reference
//! triangle has vertices `(0,0)`, `(1,0)`, `(0,1)`, so `x = l1`, `y = l2`.
//! Degree-2 nodes are the three vertices followed by the edge midpoints, edge
//! `k` being opposite vertex `k`.

use thiserror::Error;

use crate::mesh::{opposite_edge, Point};

pub const MAX_NODES: usize = 6;

#[derive(Debug, Error, PartialEq)]
#[error("no quadrature rule of degree {0} (supported: 0..=6)")]
pub struct UnsupportedDegree(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReferenceElement {
    pub degree: usize,
}

pub const P1: ReferenceElement = ReferenceElement { degree: 1 };
pub const P2: ReferenceElement = ReferenceElement { degree: 2 };

const DREF: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];

impl ReferenceElement {
    pub fn new(degree: usize) -> Self {
        assert!(degree == 1 || degree == 2, "only degrees 1 and 2 are supported");
        ReferenceElement { degree }
    }

    pub fn node_count(&self) -> usize {
        if self.degree == 1 {
            3
        } else {
            6
        }
    }

    pub fn node_coords(&self) -> Vec<[f64; 3]> {
        let mut out = vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        if self.degree == 2 {
            for k in 0..3 {
                let (i, j) = opposite_edge(k);
                let mut b = [0.0; 3];
                b[i] = 0.5;
                b[j] = 0.5;
                out.push(b);
            }
        }
        out
    }

    /// Basis values and gradients with respect to reference `(x, y)`.
    ///
    /// Only the first `node_count()` entries are written.
    pub fn eval(&self, b: [f64; 3], values: &mut [f64; MAX_NODES], grads: &mut [[f64; 2]; MAX_NODES]) {
        match self.degree {
            1 => {
                values[..3].copy_from_slice(&b);
                grads[..3].copy_from_slice(&DREF);
            }
            _ => {
                for i in 0..3 {
                    values[i] = b[i] * (2.0 * b[i] - 1.0);
                    let s = 4.0 * b[i] - 1.0;
                    grads[i] = [s * DREF[i][0], s * DREF[i][1]];
                }
                for k in 0..3 {
                    let (i, j) = opposite_edge(k);
                    values[3 + k] = 4.0 * b[i] * b[j];
                    grads[3 + k] =
                        [4.0 * (b[j] * DREF[i][0] + b[i] * DREF[j][0]), 4.0 * (b[j] * DREF[i][1] + b[i] * DREF[j][1])];
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub degree: usize,
    pub points: Vec<[f64; 3]>,
    /// Weights sum to the reference area 1/2.
    pub weights: Vec<f64>,
}

fn push_orbit(points: &mut Vec<[f64; 3]>, weights: &mut Vec<f64>, a: f64, b: f64, w: f64) {
    // all distinct permutations of (a, b, 1 - a - b)
    let c = 1.0 - a - b;
    let mut perms = vec![[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]];
    perms.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    perms.dedup_by(|x, y| x.iter().zip(y.iter()).all(|(p, q)| (p - q).abs() < 1e-15));
    for p in perms {
        points.push(p);
        weights.push(0.5 * w);
    }
}

/// Symmetric rule with positive weights exact for polynomials of total
/// degree `degree` (degree 3 uses the degree-4 rule).
pub fn quadrature(degree: usize) -> Result<QuadratureRule, UnsupportedDegree> {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let third = 1.0 / 3.0;
    let actual = match degree {
        0 | 1 => {
            push_orbit(&mut points, &mut weights, third, third, 1.0);
            1
        }
        2 => {
            push_orbit(&mut points, &mut weights, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0);
            2
        }
        3 | 4 => {
            push_orbit(&mut points, &mut weights, 0.445_948_490_915_965, 0.445_948_490_915_965, 0.223_381_589_678_011);
            push_orbit(&mut points, &mut weights, 0.091_576_213_509_771, 0.091_576_213_509_771, 0.109_951_743_655_322);
            4
        }
        5 => {
            let s = 15f64.sqrt();
            push_orbit(&mut points, &mut weights, third, third, 0.225);
            let a = (6.0 - s) / 21.0;
            push_orbit(&mut points, &mut weights, a, a, (155.0 - s) / 1200.0);
            let b = (6.0 + s) / 21.0;
            push_orbit(&mut points, &mut weights, b, b, (155.0 + s) / 1200.0);
            5
        }
        6 => {
            push_orbit(&mut points, &mut weights, 0.249_286_745_170_910, 0.249_286_745_170_910, 0.116_786_275_726_379);
            push_orbit(&mut points, &mut weights, 0.063_089_014_491_502, 0.063_089_014_491_502, 0.050_844_906_370_207);
            push_orbit(&mut points, &mut weights, 0.053_145_049_844_817, 0.310_352_451_033_784, 0.082_851_075_618_374);
            6
        }
        d => return Err(UnsupportedDegree(d)),
    };
    Ok(QuadratureRule { degree: actual, points, weights })
}

/// Affine map from the reference triangle onto a physical cell.
#[derive(Debug, Clone, Copy)]
pub struct CellGeometry {
    pub origin: Point,
    pub jacobian: [[f64; 2]; 2],
    pub det: f64,
    /// Inverse transpose of the Jacobian.
    pub inv_t: [[f64; 2]; 2],
}

impl CellGeometry {
    pub fn new(p: [Point; 3]) -> Self {
        let j = [[p[1][0] - p[0][0], p[2][0] - p[0][0]], [p[1][1] - p[0][1], p[2][1] - p[0][1]]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let inv_t = [[j[1][1] / det, -j[1][0] / det], [-j[0][1] / det, j[0][0] / det]];
        CellGeometry { origin: p[0], jacobian: j, det, inv_t }
    }

    pub fn area(&self) -> f64 {
        0.5 * self.det.abs()
    }

    pub fn map(&self, b: [f64; 3]) -> Point {
        let j = &self.jacobian;
        [self.origin[0] + j[0][0] * b[1] + j[0][1] * b[2], self.origin[1] + j[1][0] * b[1] + j[1][1] * b[2]]
    }

    pub fn push_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        let m = &self.inv_t;
        [m[0][0] * g[0] + m[0][1] * g[1], m[1][0] * g[0] + m[1][1] * g[1]]
    }

    /// Barycentric coordinates of a physical point.
    pub fn barycentric(&self, x: Point) -> [f64; 3] {
        let (dx, dy) = (x[0] - self.origin[0], x[1] - self.origin[1]);
        let j = &self.jacobian;
        let l1 = (j[1][1] * dx - j[0][1] * dy) / self.det;
        let l2 = (-j[1][0] * dx + j[0][0] * dy) / self.det;
        [1.0 - l1 - l2, l1, l2]
    }
}

/// Basis values and reference gradients tabulated on a quadrature rule.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub element: ReferenceElement,
    pub rule: QuadratureRule,
    pub values: Vec<[f64; MAX_NODES]>,
    pub ref_grads: Vec<[[f64; 2]; MAX_NODES]>,
}

impl Tabulation {
    pub fn new(element: ReferenceElement, rule: QuadratureRule) -> Self {
        let mut values = Vec::with_capacity(rule.points.len());
        let mut ref_grads = Vec::with_capacity(rule.points.len());
        for &b in &rule.points {
            let mut v = [0.0; MAX_NODES];
            let mut g = [[0.0; 2]; MAX_NODES];
            element.eval(b, &mut v, &mut g);
            values.push(v);
            ref_grads.push(g);
        }
        Tabulation { element, rule, values, ref_grads }
    }

    pub fn physical_grads(&self, q: usize, geo: &CellGeometry) -> [[f64; 2]; MAX_NODES] {
        let mut out = [[0.0; 2]; MAX_NODES];
        for (o, g) in out.iter_mut().zip(&self.ref_grads[q]).take(self.element.node_count()) {
            *o = geo.push_gradient(*g);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    fn integrate(rule: &QuadratureRule, f: impl Fn(f64, f64) -> f64) -> f64 {
        rule.points.iter().zip(&rule.weights).map(|(b, w)| w * f(b[1], b[2])).sum()
    }

    #[test]
    fn rules_integrate_monomials_exactly() {
        for d in 0..=6 {
            let rule = quadrature(d).unwrap();
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            for i in 0..=rule.degree as u32 {
                for j in 0..=(rule.degree as u32 - i) {
                    let exact = factorial(i) * factorial(j) / factorial(i + j + 2);
                    let q = integrate(&rule, |x, y| x.powi(i as i32) * y.powi(j as i32));
                    assert!((q - exact).abs() < 1e-13, "degree {d}: x^{i} y^{j}: {q} vs {exact}");
                }
            }
        }
        assert_eq!(quadrature(7).unwrap_err(), UnsupportedDegree(7));
    }

    #[test]
    fn analytic_integrals() {
        let r2 = quadrature(2).unwrap();
        assert!((integrate(&r2, |x, y| x + y) - 1.0 / 3.0).abs() < 1e-15);
        assert!((integrate(&r2, |_, _| 1.0) - 0.5).abs() < 1e-15);
        let r4 = quadrature(4).unwrap();
        assert!((integrate(&r4, |x, y| x * x * y * y) - 1.0 / 180.0).abs() < 1e-15);
    }

    #[test]
    fn kronecker_and_partition_of_unity() {
        for el in [P1, P2] {
            let nodes = el.node_coords();
            let mut v = [0.0; MAX_NODES];
            let mut g = [[0.0; 2]; MAX_NODES];
            for (a, &b) in nodes.iter().enumerate() {
                el.eval(b, &mut v, &mut g);
                for (k, &val) in v.iter().enumerate().take(el.node_count()) {
                    let expect = if k == a { 1.0 } else { 0.0 };
                    assert!((val - expect).abs() < 1e-15);
                }
            }
            for b in [[0.2, 0.3, 0.5], [1.0 / 3.0; 3], [0.7, 0.1, 0.2]] {
                el.eval(b, &mut v, &mut g);
                let n = el.node_count();
                assert!((v[..n].iter().sum::<f64>() - 1.0).abs() < 1e-14);
                let gs = g[..n].iter().fold([0.0, 0.0], |s, x| [s[0] + x[0], s[1] + x[1]]);
                assert!(gs[0].abs() < 1e-14 && gs[1].abs() < 1e-14);
            }
        }
        let mut v = [0.0; MAX_NODES];
        let mut g = [[0.0; 2]; MAX_NODES];
        P1.eval([1.0 / 3.0; 3], &mut v, &mut g);
        assert!(v[..3].iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut v = [0.0; MAX_NODES];
        let mut g = [[0.0; 2]; MAX_NODES];
        let mut vp = [0.0; MAX_NODES];
        let mut vm = [0.0; MAX_NODES];
        let (x, y, h) = (0.3, 0.2, 1e-6);
        P2.eval([1.0 - x - y, x, y], &mut v, &mut g);
        P2.eval([1.0 - x - h - y, x + h, y], &mut vp, &mut [[0.0; 2]; MAX_NODES]);
        P2.eval([1.0 - x + h - y, x - h, y], &mut vm, &mut [[0.0; 2]; MAX_NODES]);
        for a in 0..6 {
            assert!(((vp[a] - vm[a]) / (2.0 * h) - g[a][0]).abs() < 1e-8);
        }
    }

    #[test]
    fn affine_interpolant_gradient_is_exact() {
        let geo = CellGeometry::new([[0.3, -0.2], [2.1, 0.4], [0.7, 1.9]]);
        let (a, b, c) = (1.5, -0.75, 0.25);
        for el in [P1, P2] {
            let coef: Vec<f64> = el
                .node_coords()
                .into_iter()
                .map(|n| {
                    let x = geo.map(n);
                    a * x[0] + b * x[1] + c
                })
                .collect();
            let tab = Tabulation::new(el, quadrature(2).unwrap());
            for q in 0..tab.rule.points.len() {
                let grads = tab.physical_grads(q, &geo);
                let mut gx = [0.0, 0.0];
                for (k, cf) in coef.iter().enumerate() {
                    gx[0] += cf * grads[k][0];
                    gx[1] += cf * grads[k][1];
                }
                assert!((gx[0] - a).abs() < 1e-12 && (gx[1] - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn barycentric_inverts_map() {
        let geo = CellGeometry::new([[0.3, -0.2], [2.1, 0.4], [0.7, 1.9]]);
        let b = [0.2, 0.5, 0.3];
        let back = geo.barycentric(geo.map(b));
        for k in 0..3 {
            assert!((back[k] - b[k]).abs() < 1e-14);
        }
    }
}
