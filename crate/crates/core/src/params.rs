//! Physical coefficients of the MPET system.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::mesh::Point;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("Poisson ratio {0} must lie in (0, 0.5)")]
    PoissonRatio(f64),
    #[error("Young's modulus {0} must be positive")]
    YoungsModulus(f64),
    #[error("{name} = {value} is out of range ({rule})")]
    OutOfRange { name: String, value: f64, rule: &'static str },
    #[error("{name} has length {found}, expected {expected}")]
    Length { name: &'static str, found: usize, expected: usize },
    #[error("transfer coefficients are not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),
}

/// Hydraulic conductivity of one network.
#[derive(Clone)]
pub enum Conductivity {
    Constant(f64),
    Field(Arc<dyn Fn(Point) -> f64 + Send + Sync>),
}

impl Conductivity {
    pub fn at(&self, x: Point) -> f64 {
        match self {
            Conductivity::Constant(k) => *k,
            Conductivity::Field(f) => f(x),
        }
    }

    pub fn constant(&self) -> Option<f64> {
        match self {
            Conductivity::Constant(k) => Some(*k),
            Conductivity::Field(_) => None,
        }
    }
}

impl fmt::Debug for Conductivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conductivity::Constant(k) => write!(f, "Constant({k})"),
            Conductivity::Field(_) => f.write_str("Field(..)"),
        }
    }
}

/// Coefficients for `A` networks; index `j` of each vector is network `j + 1`.
#[derive(Debug, Clone)]
pub struct MpetParameters {
    pub mu: f64,
    pub lam: f64,
    pub alpha: Vec<f64>,
    pub c: Vec<f64>,
    pub k: Vec<Conductivity>,
    /// `xi[j][i]` is the transfer coefficient into network `j` from `i`.
    pub xi: Vec<Vec<f64>>,
}

impl MpetParameters {
    pub fn networks(&self) -> usize {
        self.alpha.len()
    }

    /// `alpha` extended with `alpha_0 = 1` in front.
    pub fn alpha_with_total(&self) -> Vec<f64> {
        std::iter::once(1.0).chain(self.alpha.iter().copied()).collect()
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let a = self.networks();
        let range = |name: String, value: f64, ok: bool, rule| {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(ParamError::OutOfRange { name, value, rule })
            }
        };
        range("mu".into(), self.mu, self.mu > 0.0, "> 0")?;
        range("lambda".into(), self.lam, self.lam > 0.0, "> 0")?;
        for (name, len) in [("c", self.c.len()), ("K", self.k.len()), ("xi", self.xi.len())] {
            if len != a {
                return Err(ParamError::Length { name, found: len, expected: a });
            }
        }
        for j in 0..a {
            range(format!("alpha_{}", j + 1), self.alpha[j], self.alpha[j] > 0.0 && self.alpha[j] <= 1.0, "in (0, 1]")?;
            range(format!("c_{}", j + 1), self.c[j], self.c[j] >= 0.0, ">= 0")?;
            if let Some(k) = self.k[j].constant() {
                range(format!("K_{}", j + 1), k, k > 0.0, "> 0")?;
            }
            if self.xi[j].len() != a {
                return Err(ParamError::Length { name: "xi row", found: self.xi[j].len(), expected: a });
            }
            for i in 0..a {
                if i != j {
                    range(format!("xi_{}<-{}", j + 1, i + 1), self.xi[j][i], self.xi[j][i] >= 0.0, ">= 0")?;
                    if self.xi[j][i] != self.xi[i][j] {
                        return Err(ParamError::Asymmetric(j + 1, i + 1));
                    }
                }
            }
        }
        Ok(())
    }
}

/// `(mu, lambda)` from Young's modulus and Poisson ratio.
pub fn lame_from_e_nu(e: f64, nu: f64) -> Result<(f64, f64), ParamError> {
    if !(e > 0.0 && e.is_finite()) {
        return Err(ParamError::YoungsModulus(e));
    }
    if !(nu > 0.0 && nu < 0.5) {
        return Err(ParamError::PoissonRatio(nu));
    }
    Ok((e / (2.0 * (1.0 + nu)), nu * e / ((1.0 - 2.0 * nu) * (1.0 + nu))))
}

/// `S_j = sum_i xi[j][i] (p_j - p_i)` with 0-based `j`.
pub fn transfer(xi: &[Vec<f64>], p: &[f64], j: usize) -> f64 {
    (0..p.len()).filter(|&i| i != j).map(|i| xi[j][i] * (p[j] - p[i])).sum()
}

/// `p_0 = lambda div u - alpha . p` (networks only in `alpha`, `p`).
pub fn total_pressure(lam: f64, alpha: &[f64], div_u: f64, p: &[f64]) -> f64 {
    lam * div_u - alpha.iter().zip(p).map(|(a, q)| a * q).sum::<f64>()
}

/// Inverse of [`total_pressure`].
pub fn divergence_from_total_pressure(lam: f64, alpha: &[f64], p0: f64, p: &[f64]) -> f64 {
    (p0 + alpha.iter().zip(p).map(|(a, q)| a * q).sum::<f64>()) / lam
}
