use std::fmt::Write as _;
use std::path::Path;

use super::LinalgError;

/// Triplet accumulator used during assembly.
#[derive(Debug, Clone, Default)]
pub struct CooMatrix {
    pub nrows: usize,
    pub ncols: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CooMatrix {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        CooMatrix { nrows, ncols, ..Default::default() }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) -> Result<(), LinalgError> {
        if i >= self.nrows {
            return Err(LinalgError::IndexOutOfRange { index: i, bound: self.nrows });
        }
        if j >= self.ncols {
            return Err(LinalgError::IndexOutOfRange { index: j, bound: self.ncols });
        }
        self.rows.push(i);
        self.cols.push(j);
        self.vals.push(v);
        Ok(())
    }

    /// Scatter-adds a dense row-major cell matrix.
    pub fn assemble_add(&mut self, cell: &[f64], row_dofs: &[usize], col_dofs: &[usize]) -> Result<(), LinalgError> {
        assert_eq!(cell.len(), row_dofs.len() * col_dofs.len(), "cell matrix shape");
        for (a, &i) in row_dofs.iter().enumerate() {
            for (b, &j) in col_dofs.iter().enumerate() {
                self.push(i, j, cell[a * col_dofs.len() + b])?;
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    /// Sums duplicates and drops nothing, so the pattern is the union of
    /// all pushed positions.
    pub fn to_csr(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.nrows + 1];
        for &i in &self.rows {
            counts[i + 1] += 1;
        }
        for i in 0..self.nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; self.len()];
        let mut vals = vec![0.0; self.len()];
        for k in 0..self.len() {
            let slot = &mut next[self.rows[k]];
            cols[*slot] = self.cols[k];
            vals[*slot] = self.vals[k];
            *slot += 1;
        }
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        let mut col_idx = Vec::with_capacity(self.len());
        let mut values = Vec::with_capacity(self.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..self.nrows {
            scratch.clear();
            scratch.extend((counts[i]..counts[i + 1]).map(|k| (cols[k], vals[k])));
            scratch.sort_unstable_by_key(|e| e.0);
            for &(j, v) in &scratch {
                if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix { nrows: self.nrows, ncols: self.ncols, row_ptr, col_idx, values }
    }
}

/// Compressed sparse row matrix with sorted, unique column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix { nrows, ncols, row_ptr: vec![0; nrows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix { nrows: n, ncols: n, row_ptr: (0..=n).collect(), col_idx: (0..n).collect(), values: vec![1.0; n] }
    }

    pub fn from_triplets(nrows: usize, ncols: usize, t: &[(usize, usize, f64)]) -> Result<Self, LinalgError> {
        let mut coo = CooMatrix::new(nrows, ncols);
        for &(i, j, v) in t {
            coo.push(i, j, v)?;
        }
        Ok(coo.to_csr())
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let mut coo = CooMatrix::new(rows.len(), rows.first().map_or(0, Vec::len));
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    coo.push(i, j, v).expect("in range");
                }
            }
        }
        coo.to_csr()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.col_idx[k], self.values[k]))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let cols = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        cols.binary_search(&j).map_or(0.0, |k| self.values[self.row_ptr[i] + k])
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec_add(1.0, x, &mut y);
        y
    }

    /// `y += alpha * A x`.
    pub fn matvec_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi += alpha * s;
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                col_idx[next[j]] = i;
                values[next[j]] = v;
                next[j] += 1;
            }
        }
        CsrMatrix { nrows: self.ncols, ncols: self.nrows, row_ptr: counts, col_idx, values }
    }

    /// `alpha * self + beta * other` over the union pattern.
    pub fn add(&self, alpha: f64, other: &CsrMatrix, beta: f64) -> CsrMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols), "shape mismatch");
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        let mut col_idx = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut values = Vec::with_capacity(col_idx.capacity());
        row_ptr.push(0);
        for i in 0..self.nrows {
            let (mut a, ae) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let (mut b, be) = (other.row_ptr[i], other.row_ptr[i + 1]);
            while a < ae || b < be {
                let ja = if a < ae { self.col_idx[a] } else { usize::MAX };
                let jb = if b < be { other.col_idx[b] } else { usize::MAX };
                if ja == jb {
                    col_idx.push(ja);
                    values.push(alpha * self.values[a] + beta * other.values[b]);
                    a += 1;
                    b += 1;
                } else if ja < jb {
                    col_idx.push(ja);
                    values.push(alpha * self.values[a]);
                    a += 1;
                } else {
                    col_idx.push(jb);
                    values.push(beta * other.values[b]);
                    b += 1;
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix { nrows: self.nrows, ncols: self.ncols, row_ptr, col_idx, values }
    }

    pub fn scaled(&self, alpha: f64) -> CsrMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `‖A − Aᵀ‖_F / ‖A‖_F` (zero for the zero matrix).
    pub fn symmetry_defect(&self) -> f64 {
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        self.add(1.0, &self.transpose(), -1.0).frobenius_norm() / norm
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn to_matrix_market(&self) -> String {
        let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
        let _ = writeln!(s, "{} {} {}", self.nrows, self.ncols, self.nnz());
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                let _ = writeln!(s, "{} {} {:e}", i + 1, j + 1, v);
            }
        }
        s
    }

    pub fn write_matrix_market(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.to_matrix_market())
    }
}

/// Rectangular grid of optional blocks; `None` is a zero block.
#[derive(Debug, Clone)]
pub struct BlockMatrix {
    pub row_sizes: Vec<usize>,
    pub col_sizes: Vec<usize>,
    pub blocks: Vec<Vec<Option<CsrMatrix>>>,
}

impl BlockMatrix {
    pub fn new(row_sizes: Vec<usize>, col_sizes: Vec<usize>) -> Self {
        let blocks = vec![vec![None; col_sizes.len()]; row_sizes.len()];
        BlockMatrix { row_sizes, col_sizes, blocks }
    }

    pub fn set(&mut self, r: usize, c: usize, m: CsrMatrix) {
        assert_eq!((m.nrows, m.ncols), (self.row_sizes[r], self.col_sizes[c]), "block ({r}, {c}) shape");
        self.blocks[r][c] = Some(m);
    }

    /// Adds `alpha * m` into block `(r, c)`.
    pub fn add_to(&mut self, r: usize, c: usize, m: &CsrMatrix, alpha: f64) {
        let merged = match self.blocks[r][c].take() {
            Some(b) => b.add(1.0, m, alpha),
            None => m.scaled(alpha),
        };
        self.set(r, c, merged);
    }

    pub fn block(&self, r: usize, c: usize) -> Option<&CsrMatrix> {
        self.blocks[r][c].as_ref()
    }

    fn offsets(sizes: &[usize]) -> Vec<usize> {
        let mut off = vec![0];
        for s in sizes {
            off.push(off.last().unwrap() + s);
        }
        off
    }

    pub fn to_csr(&self) -> CsrMatrix {
        let ro = Self::offsets(&self.row_sizes);
        let co = Self::offsets(&self.col_sizes);
        let nrows = *ro.last().unwrap();
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for (r, row_blocks) in self.blocks.iter().enumerate() {
            for i in 0..self.row_sizes[r] {
                for (c, b) in row_blocks.iter().enumerate() {
                    if let Some(b) = b {
                        for (j, v) in b.row(i) {
                            col_idx.push(co[c] + j);
                            values.push(v);
                        }
                    }
                }
                row_ptr.push(col_idx.len());
            }
        }
        CsrMatrix { nrows, ncols: *co.last().unwrap(), row_ptr, col_idx, values }
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
