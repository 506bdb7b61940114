//! Scalar types for closed-form fields: plain `f64` and second-order
//! forward-mode jets in `(x, y, t)`.
//!
//! Exact solutions are written once over [`Real`]; evaluating them on jets
//! yields values, gradients and Hessians without finite differences.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
}

impl Real for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
}

/// Value, gradient and Hessian with respect to `(x, y, t)`.
///
/// The Hessian is stored as `[xx, xy, xt, yy, yt, tt]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub v: f64,
    pub g: [f64; 3],
    pub h: [f64; 6],
}

const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

impl Jet {
    /// Seeds the independent variables.
    pub fn variables(x: f64, y: f64, t: f64) -> [Jet; 3] {
        let seed = |v, k: usize| {
            let mut g = [0.0; 3];
            g[k] = 1.0;
            Jet { v, g, h: [0.0; 6] }
        };
        [seed(x, 0), seed(y, 1), seed(t, 2)]
    }

    pub fn hess(&self, a: usize, b: usize) -> f64 {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let k = PAIRS.iter().position(|&p| p == (a, b)).expect("index < 3");
        self.h[k]
    }

    pub fn laplacian(&self) -> f64 {
        self.h[0] + self.h[3]
    }

    fn chain(self, f0: f64, f1: f64, f2: f64) -> Jet {
        let mut out = Jet { v: f0, g: [0.0; 3], h: [0.0; 6] };
        for k in 0..3 {
            out.g[k] = f1 * self.g[k];
        }
        for (k, &(a, b)) in PAIRS.iter().enumerate() {
            out.h[k] = f1 * self.h[k] + f2 * self.g[a] * self.g[b];
        }
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut r = self;
        r.v += o.v;
        for k in 0..3 {
            r.g[k] += o.g[k];
        }
        for k in 0..6 {
            r.h[k] += o.h[k];
        }
        r
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self * -1.0
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut r = Jet { v: self.v * o.v, g: [0.0; 3], h: [0.0; 6] };
        for k in 0..3 {
            r.g[k] = self.g[k] * o.v + self.v * o.g[k];
        }
        for (k, &(a, b)) in PAIRS.iter().enumerate() {
            r.h[k] = self.h[k] * o.v + self.v * o.h[k] + self.g[a] * o.g[b] + self.g[b] * o.g[a];
        }
        r
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, c: f64) -> Jet {
        self.v += c;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, c: f64) -> Jet {
        self.v *= c;
        self.g.iter_mut().for_each(|x| *x *= c);
        self.h.iter_mut().for_each(|x| *x *= c);
        self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, c: f64) -> Jet {
        self * (1.0 / c)
    }
}

impl Real for Jet {
    fn cst(v: f64) -> Self {
        Jet { v, ..Default::default() }
    }
    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }
}
