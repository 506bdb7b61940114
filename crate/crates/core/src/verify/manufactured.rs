//! Manufactured solutions with hand-derived sources and a residual oracle.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::fields::{Jet, Real};
use crate::forms::{ScalarFn, SourceData};
use crate::mesh::Point;
use crate::params::{lame_from_e_nu, Conductivity, MpetParameters};

/// Closed-form exact fields, generic over plain values and jets.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactSolution {
    /// Smooth solution linear in time vanishing on the unit square boundary:
    /// `u = t (sin 2πy (cos 2πx − 1) + sP, sin 2πx (1 − cos 2πy) + sP)` and
    /// `p_j = −j t P` with `P = sin πx sin πy`, `s = 1 / (μ + λ)`.
    Example1 {
        mu: f64,
        lam: f64,
        networks: usize,
    },
    Zero {
        networks: usize,
    },
}

impl ExactSolution {
    pub fn networks(&self) -> usize {
        match self {
            ExactSolution::Example1 { networks, .. } | ExactSolution::Zero { networks } => *networks,
        }
    }

    pub fn u<R: Real>(&self, x: R, y: R, t: R) -> [R; 2] {
        match self {
            ExactSolution::Example1 { mu, lam, .. } => {
                let s = 1.0 / (mu + lam);
                let p = (x * PI).sin() * (y * PI).sin() * s;
                let (sx, cx) = ((x * (2.0 * PI)).sin(), (x * (2.0 * PI)).cos());
                let (sy, cy) = ((y * (2.0 * PI)).sin(), (y * (2.0 * PI)).cos());
                [t * (sy * (cx + -1.0) + p), t * (sx * (-cy + 1.0) + p)]
            }
            ExactSolution::Zero { .. } => [R::cst(0.0), R::cst(0.0)],
        }
    }

    /// Network pressure `j` (1-based).
    pub fn p<R: Real>(&self, j: usize, x: R, y: R, t: R) -> R {
        match self {
            ExactSolution::Example1 { .. } => t * (x * PI).sin() * (y * PI).sin() * -(j as f64),
            ExactSolution::Zero { .. } => R::cst(0.0),
        }
    }

    fn jets(x: Point, t: f64) -> [Jet; 3] {
        Jet::variables(x[0], x[1], t)
    }

    /// Displacement values and gradient rows `grad[k] = ∇u_k`.
    pub fn u_value_grad(&self, x: Point, t: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        let [jx, jy, jt] = Self::jets(x, t);
        let u = self.u(jx, jy, jt);
        ([u[0].v, u[1].v], [[u[0].g[0], u[0].g[1]], [u[1].g[0], u[1].g[1]]])
    }

    pub fn p_value_grad(&self, j: usize, x: Point, t: f64) -> (f64, [f64; 2]) {
        let [jx, jy, jt] = Self::jets(x, t);
        let p = self.p(j, jx, jy, jt);
        (p.v, [p.g[0], p.g[1]])
    }

    /// `p_0 = λ div u − Σ α_j p_j` and its gradient.
    pub fn p0_value_grad(&self, params: &MpetParameters, x: Point, t: f64) -> (f64, [f64; 2]) {
        let [jx, jy, jt] = Self::jets(x, t);
        let u = self.u(jx, jy, jt);
        let div = |k: usize| u[0].hess(0, k) + u[1].hess(1, k);
        let mut v = params.lam * (u[0].g[0] + u[1].g[1]);
        let mut g = [params.lam * div(0), params.lam * div(1)];
        for (j, &a) in params.alpha.iter().enumerate() {
            let p = self.p(j + 1, jx, jy, jt);
            v -= a * p.v;
            g[0] -= a * p.g[0];
            g[1] -= a * p.g[1];
        }
        (v, g)
    }
}

#[derive(Debug, Clone)]
pub struct ManufacturedCase {
    pub name: String,
    pub params: MpetParameters,
    pub exact: ExactSolution,
    pub sources: SourceData,
    pub t_final: f64,
    pub dt: f64,
}

/// Example 1 data: `A = 2`, `E = 1`, `α_j = K_j = 1`, `ξ = 0`, `c_j = c`,
/// `T = 0.5`, `dt = 0.125`.
pub fn example1_case(nu: f64, c: f64) -> ManufacturedCase {
    let (mu, lam) = lame_from_e_nu(1.0, nu).expect("0 < nu < 0.5");
    let params = MpetParameters {
        mu,
        lam,
        alpha: vec![1.0, 1.0],
        c: vec![c, c],
        k: vec![Conductivity::Constant(1.0); 2],
        xi: vec![vec![0.0; 2]; 2],
    };
    example1_with_params(format!("example1(nu={nu}, c={c})"), params)
}

/// Example 1 exact fields with arbitrary constant coefficients.
pub fn example1_with_params(name: String, params: MpetParameters) -> ManufacturedCase {
    let exact = ExactSolution::Example1 { mu: params.mu, lam: params.lam, networks: params.networks() };
    let sources = example1_sources(&params);
    ManufacturedCase { name, params, exact, sources, t_final: 0.5, dt: 0.125 }
}

/// Sources obtained by substituting the Example 1 fields into the MPET
/// equations by hand (constant coefficients).
fn example1_sources(params: &MpetParameters) -> SourceData {
    let mu = params.mu;
    let s = 1.0 / (params.mu + params.lam);
    let a = params.networks();
    let weighted_j: f64 = params.alpha.iter().enumerate().map(|(j, al)| al * (j + 1) as f64).sum();
    let pi2 = PI * PI;
    let f = Arc::new(move |x: Point, t: f64| {
        let (sx, cx) = (PI * x[0]).sin_cos();
        let (sy, cy) = (PI * x[1]).sin_cos();
        let (s2x, c2x) = (2.0 * PI * x[0]).sin_cos();
        let (s2y, c2y) = (2.0 * PI * x[1]).sin_cos();
        let p = sx * sy;
        let (px, py) = (PI * cx * sy, PI * sx * cy);
        let pxy = pi2 * cx * cy;
        let lap_w = [4.0 * pi2 * s2y * (1.0 - 2.0 * c2x), 4.0 * pi2 * s2x * (2.0 * c2y - 1.0)];
        let lap_sp = -2.0 * pi2 * s * p;
        // (mu + lam) grad div u = t grad(P_x + P_y) since (mu + lam) s = 1
        let grad_div = [-pi2 * p + pxy, pxy - pi2 * p];
        [
            -mu * t * (lap_w[0] + lap_sp) - t * grad_div[0] - t * weighted_j * px,
            -mu * t * (lap_w[1] + lap_sp) - t * grad_div[1] - t * weighted_j * py,
        ]
    });
    let g = (0..a)
        .map(|jj| {
            let j = (jj + 1) as f64;
            let c = params.c[jj];
            let alpha = params.alpha[jj];
            let k = params.k[jj].constant().expect("manufactured sources need constant K");
            let exchange: f64 = (0..a).filter(|&i| i != jj).map(|i| params.xi[jj][i] * ((i + 1) as f64 - j)).sum();
            let g: ScalarFn = Arc::new(move |x: Point, t: f64| {
                let (sx, cx) = (PI * x[0]).sin_cos();
                let (sy, cy) = (PI * x[1]).sin_cos();
                let p = sx * sy;
                let div_dot = s * PI * (cx * sy + sx * cy);
                -c * j * p + alpha * div_dot - 2.0 * pi2 * k * j * t * p + exchange * t * p
            });
            Some(g)
        })
        .collect();
    SourceData { f: Some(f), g, normal_stress: Vec::new() }
}

/// Largest absolute residual of the strong MPET equations for the exact
/// fields and the case's sources, over `(x, y, t)` samples.
///
/// Derivatives are exact (forward-mode jets), so the only error is
/// rounding. Conductivities are evaluated pointwise and treated as locally
/// constant.
pub fn residual_oracle(case: &ManufacturedCase, samples: &[(Point, f64)]) -> f64 {
    let p = &case.params;
    let a = p.networks();
    let mut worst: f64 = 0.0;
    for &(x, t) in samples {
        let [jx, jy, jt] = Jet::variables(x[0], x[1], t);
        let u = case.exact.u(jx, jy, jt);
        let pj: Vec<Jet> = (1..=a).map(|j| case.exact.p(j, jx, jy, jt)).collect();
        let grad_div = |k: usize| u[0].hess(0, k) + u[1].hess(1, k);
        let f = case.sources.f.as_ref().map_or([0.0; 2], |f| f(x, t));
        for k in 0..2 {
            let mut r = -p.mu * u[k].laplacian() - (p.mu + p.lam) * grad_div(k);
            for j in 0..a {
                r += p.alpha[j] * pj[j].g[k];
            }
            worst = worst.max((r - f[k]).abs());
        }
        let div_dot = u[0].hess(0, 2) + u[1].hess(1, 2);
        let values: Vec<f64> = pj.iter().map(|q| q.v).collect();
        for j in 0..a {
            let g = case.sources.g[j].as_ref().map_or(0.0, |g| g(x, t));
            let r = p.c[j] * pj[j].g[2] + p.alpha[j] * div_dot - p.k[j].at(x) * pj[j].laplacian()
                + crate::params::transfer(&p.xi, &values, j);
            worst = worst.max((r - g).abs());
        }
    }
    worst
}
