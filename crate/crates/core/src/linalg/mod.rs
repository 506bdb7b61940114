//! Sparse matrices, block systems and a direct solver.

mod dirichlet;
mod lu;
mod ordering;
mod sparse;

use thiserror::Error;

pub use dirichlet::DirichletElimination;
pub use lu::{backward_error, residual, SparseLu, DIAG_PREFERENCE, PIVOT_TOL};
pub use ordering::nested_dissection;
pub use sparse::{norm2, BlockMatrix, CooMatrix, CsrMatrix};

/// Largest accepted relative residual of any solve.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("index {index} out of range (dimension {bound})")]
    IndexOutOfRange { index: usize, bound: usize },
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is singular: no acceptable pivot at elimination step {pivot} (column {column})")]
    Singular { pivot: usize, column: usize },
    #[error("relative residual {residual:.3e} exceeds {RESIDUAL_TOL:e}")]
    Residual { residual: f64 },
}

/// Componentwise backward error accepted when the normwise residual is
/// limited by cancellation (`‖|A||x|‖ ≫ ‖b‖`) rather than by the solve.
pub const BACKWARD_TOL: f64 = 1e-14;

/// Checks a solve against [`RESIDUAL_TOL`] (for `b = 0` the absolute bound is
/// 1e-12), falling back to [`BACKWARD_TOL`] on the componentwise backward error.
pub fn check_residual(rel: f64, backward: f64, b: &[f64]) -> Result<f64, LinalgError> {
    let limit = if norm2(b) == 0.0 { 1e-12 } else { RESIDUAL_TOL };
    if rel.is_finite() && (rel <= limit || backward <= BACKWARD_TOL) {
        Ok(rel)
    } else {
        Err(LinalgError::Residual { residual: rel })
    }
}

/// A factorized matrix that checks the residual of every solve.
#[derive(Debug, Clone)]
pub struct Factorized {
    pub matrix: CsrMatrix,
    lu: SparseLu,
}

impl Factorized {
    pub fn new(matrix: CsrMatrix) -> Result<Self, LinalgError> {
        let lu = SparseLu::new(&matrix)?;
        Ok(Factorized { matrix, lu })
    }

    pub fn lu(&self) -> &SparseLu {
        &self.lu
    }

    /// Returns the solution and its relative residual.
    pub fn solve(&self, b: &[f64]) -> Result<(Vec<f64>, f64), LinalgError> {
        let (x, rel) = self.lu.solve_refined(&self.matrix, b);
        let backward = if rel <= RESIDUAL_TOL { 0.0 } else { backward_error(&self.matrix, &x, b) };
        check_residual(rel, backward, b)?;
        Ok((x, rel))
    }
}

/// Block operator, right-hand side and prescribed dof values of one solve.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub matrix: BlockMatrix,
    pub rhs: Vec<f64>,
    /// `(global dof, value)` pairs.
    pub constraints: Vec<(usize, f64)>,
}

impl BlockSystem {
    /// Symmetric elimination of the constraints.
    pub fn apply_dirichlet(&self) -> (CsrMatrix, Vec<f64>) {
        let a = self.matrix.to_csr();
        let dofs: Vec<usize> = self.constraints.iter().map(|c| c.0).collect();
        let elim = DirichletElimination::new(&a, &dofs);
        let mut values = vec![0.0; a.nrows];
        for &(d, v) in &self.constraints {
            values[d] = v;
        }
        let mut b = self.rhs.clone();
        elim.apply(&mut b, &values);
        (elim.matrix, b)
    }

    /// Solution and relative residual of the eliminated system.
    pub fn solve(&self) -> Result<(Vec<f64>, f64), LinalgError> {
        let (a, b) = self.apply_dirichlet();
        Factorized::new(a)?.solve(&b)
    }
}
