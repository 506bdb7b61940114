//! Left-looking sparse LU with threshold partial pivoting.
//!
//! Columns are processed in a fill-reducing order; each column is a sparse
//! triangular solve against the computed part of `L` whose nonzero pattern is
//! found by depth-first search. Rows are chosen by partial pivoting with a
//! preference for the diagonal entry.

use super::{nested_dissection, norm2, CsrMatrix, LinalgError};

const NONE: usize = usize::MAX;

/// Pivots at or below this fraction of the column's largest entry are
/// treated as zero.
pub const PIVOT_TOL: f64 = 1e-14;
/// Keep the diagonal as pivot while it is at least this fraction of the
/// largest candidate.
pub const DIAG_PREFERENCE: f64 = 0.01;

#[derive(Debug, Clone)]
pub struct SparseLu {
    n: usize,
    q: Vec<usize>,
    pinv: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    up: Vec<usize>,
    ui: Vec<usize>,
    ux: Vec<f64>,
}

impl SparseLu {
    /// Factorizes with a nested-dissection column order.
    pub fn new(a: &CsrMatrix) -> Result<Self, LinalgError> {
        if a.nrows != a.ncols {
            return Err(LinalgError::NotSquare { rows: a.nrows, cols: a.ncols });
        }
        let q = nested_dissection(a);
        Self::with_order(a, q)
    }

    pub fn with_order(a: &CsrMatrix, q: Vec<usize>) -> Result<Self, LinalgError> {
        let n = a.nrows;
        if a.ncols != n {
            return Err(LinalgError::NotSquare { rows: n, cols: a.ncols });
        }
        assert_eq!(q.len(), n, "ordering length");
        // rows of the transpose are the columns of `a`
        let cols = a.transpose();
        let mut f = SparseLu {
            n,
            q,
            pinv: vec![NONE; n],
            lp: Vec::with_capacity(n + 1),
            li: Vec::with_capacity(4 * a.nnz()),
            lx: Vec::with_capacity(4 * a.nnz()),
            up: Vec::with_capacity(n + 1),
            ui: Vec::with_capacity(4 * a.nnz()),
            ux: Vec::with_capacity(4 * a.nnz()),
        };
        f.lp.push(0);
        f.up.push(0);
        let mut x = vec![0.0; n];
        let mut xi = vec![0usize; n];
        let mut mark = vec![NONE; n];
        let mut stack = Vec::with_capacity(n);
        let mut pstack = vec![0usize; n];

        for k in 0..n {
            let col = f.q[k];
            let entries = cols.row_ptr[col]..cols.row_ptr[col + 1];

            let mut top = n;
            for p in entries.clone() {
                let i = cols.col_idx[p];
                if mark[i] != k {
                    top = f.dfs(i, k, top, &mut xi, &mut mark, &mut stack, &mut pstack);
                }
            }

            let mut col_max: f64 = 0.0;
            for p in entries {
                x[cols.col_idx[p]] = cols.values[p];
                col_max = col_max.max(cols.values[p].abs());
            }
            for &j in &xi[top..n] {
                let jj = f.pinv[j];
                if jj == NONE {
                    continue;
                }
                let xj = x[j];
                if xj == 0.0 {
                    continue;
                }
                for p in f.lp[jj] + 1..f.lp[jj + 1] {
                    x[f.li[p]] -= f.lx[p] * xj;
                }
            }

            let mut ipiv = NONE;
            let mut amax = 0.0;
            for &i in &xi[top..n] {
                if f.pinv[i] == NONE {
                    if x[i].abs() > amax {
                        amax = x[i].abs();
                        ipiv = i;
                    }
                } else {
                    f.ui.push(f.pinv[i]);
                    f.ux.push(x[i]);
                }
            }
            if ipiv == NONE || amax <= PIVOT_TOL * col_max || amax == 0.0 {
                return Err(LinalgError::Singular { pivot: k, column: col });
            }
            if f.pinv[col] == NONE && mark[col] == k && x[col].abs() >= DIAG_PREFERENCE * amax {
                ipiv = col;
            }
            let pivot = x[ipiv];
            f.ui.push(k);
            f.ux.push(pivot);
            f.up.push(f.ui.len());
            f.pinv[ipiv] = k;
            f.li.push(ipiv);
            f.lx.push(1.0);
            for &i in &xi[top..n] {
                if f.pinv[i] == NONE {
                    f.li.push(i);
                    f.lx.push(x[i] / pivot);
                }
                x[i] = 0.0;
            }
            f.lp.push(f.li.len());
        }
        for i in f.li.iter_mut() {
            *i = f.pinv[*i];
        }
        Ok(f)
    }

    /// Depth-first search in the graph of `L` from row `j`; appends the
    /// reached rows in topological order to `xi[top..]`.
    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        j: usize,
        stamp: usize,
        mut top: usize,
        xi: &mut [usize],
        mark: &mut [usize],
        stack: &mut Vec<usize>,
        pstack: &mut [usize],
    ) -> usize {
        stack.clear();
        stack.push(j);
        while let Some(&j) = stack.last() {
            let h = stack.len() - 1;
            let jnew = self.pinv[j];
            if mark[j] != stamp {
                mark[j] = stamp;
                pstack[h] = if jnew == NONE { 0 } else { self.lp[jnew] };
            }
            let end = if jnew == NONE { 0 } else { self.lp[jnew + 1] };
            let mut p = pstack[h];
            let mut pushed = false;
            while p < end {
                let i = self.li[p];
                p += 1;
                if mark[i] != stamp {
                    pstack[h] = p;
                    stack.push(i);
                    pushed = true;
                    break;
                }
            }
            if !pushed {
                stack.pop();
                top -= 1;
                xi[top] = j;
            }
        }
        top
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of `L` plus `U`.
    pub fn fill(&self) -> usize {
        self.lx.len() + self.ux.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "right-hand side length");
        let mut y = vec![0.0; self.n];
        for (i, &bi) in b.iter().enumerate() {
            y[self.pinv[i]] = bi;
        }
        for j in 0..self.n {
            let yj = y[j];
            if yj != 0.0 {
                for p in self.lp[j] + 1..self.lp[j + 1] {
                    y[self.li[p]] -= self.lx[p] * yj;
                }
            }
        }
        for j in (0..self.n).rev() {
            let d = self.up[j + 1] - 1;
            y[j] /= self.ux[d];
            let yj = y[j];
            if yj != 0.0 {
                for p in self.up[j]..d {
                    y[self.ui[p]] -= self.ux[p] * yj;
                }
            }
        }
        let mut x = vec![0.0; self.n];
        for (k, &c) in self.q.iter().enumerate() {
            x[c] = y[k];
        }
        x
    }

    /// Solves with iterative refinement and returns the solution together
    /// with the final relative residual `‖Ax − b‖ / ‖b‖` (absolute when `b = 0`).
    pub fn solve_refined(&self, a: &CsrMatrix, b: &[f64]) -> (Vec<f64>, f64) {
        let bnorm = norm2(b);
        let scale = if bnorm > 0.0 { bnorm } else { 1.0 };
        let mut x = self.solve(b);
        let mut res = residual(a, &x, b);
        let mut rel = norm2(&res) / scale;
        for _ in 0..5 {
            if rel <= 1e-14 {
                break;
            }
            let dx = self.solve(&res);
            let cand: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + d).collect();
            let cres = residual(a, &cand, b);
            let crel = norm2(&cres) / scale;
            if crel >= rel {
                break;
            }
            x = cand;
            res = cres;
            rel = crel;
        }
        (x, rel)
    }
}

/// Componentwise (Oettli-Prager) backward error `max |b - Ax|_i / (|A||x| + |b|)_i`.
pub fn backward_error(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let r = residual(a, x, b);
    (0..a.nrows)
        .map(|i| {
            let d = a.row(i).map(|(j, v)| (v * x[j]).abs()).sum::<f64>() + b[i].abs();
            if d > 0.0 {
                r[i].abs() / d
            } else if r[i] == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

/// `b - A x` with compensated (twice-working-precision) row sums, so the
/// residual of a nearly exact solution is not swamped by cancellation.
pub fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    (0..a.nrows)
        .map(|i| {
            let (mut s, mut c) = (b[i], 0.0);
            for (j, v) in a.row(i) {
                let p = -v * x[j];
                let pe = (-v).mul_add(x[j], -p);
                let t = s + p;
                let z = t - s;
                c += (s - (t - z)) + (p - z) + pe;
                s = t;
            }
            s + c
        })
        .collect()
}
