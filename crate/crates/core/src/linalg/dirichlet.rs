use super::CsrMatrix;

/// Symmetric elimination of constrained dofs.
///
/// Constrained rows and columns are replaced by the identity; the removed
/// columns are kept in `lift` so prescribed values can be moved to the
/// right-hand side for every new set of values.
#[derive(Debug, Clone)]
pub struct DirichletElimination {
    pub matrix: CsrMatrix,
    lift: CsrMatrix,
    constrained: Vec<bool>,
}

impl DirichletElimination {
    pub fn new(a: &CsrMatrix, constrained_dofs: &[usize]) -> Self {
        let n = a.nrows;
        let mut constrained = vec![false; n];
        for &d in constrained_dofs {
            constrained[d] = true;
        }
        let mut m = CsrMatrix { nrows: n, ncols: n, row_ptr: vec![0], col_idx: Vec::new(), values: Vec::new() };
        let mut l = CsrMatrix { nrows: n, ncols: n, row_ptr: vec![0], col_idx: Vec::new(), values: Vec::new() };
        for i in 0..n {
            if constrained[i] {
                m.col_idx.push(i);
                m.values.push(1.0);
            } else {
                for (j, v) in a.row(i) {
                    if constrained[j] {
                        l.col_idx.push(j);
                        l.values.push(v);
                    } else {
                        m.col_idx.push(j);
                        m.values.push(v);
                    }
                }
            }
            m.row_ptr.push(m.col_idx.len());
            l.row_ptr.push(l.col_idx.len());
        }
        DirichletElimination { matrix: m, lift: l, constrained }
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.constrained[dof]
    }

    /// Lifts `rhs` in place for prescribed `values` (entries at free dofs
    /// of `values` are ignored).
    pub fn apply(&self, rhs: &mut [f64], values: &[f64]) {
        let mut g = values.to_vec();
        for (gi, &c) in g.iter_mut().zip(&self.constrained) {
            if !c {
                *gi = 0.0;
            }
        }
        self.lift.matvec_add(-1.0, &g, rhs);
        for (i, &c) in self.constrained.iter().enumerate() {
            if c {
                rhs[i] = values[i];
            }
        }
    }
}
