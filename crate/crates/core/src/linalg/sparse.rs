use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Compressed sparse row matrix with `f64` weights.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Validates the CSR invariants: monotone offsets, sorted in-range
    /// columns per row and finite weights.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != n_rows + 1 || row_ptr[0] != 0 {
            return Err(Error::Shape(format!(
                "row_ptr must start at 0 and have {} entries",
                n_rows + 1
            )));
        }
        if row_ptr[n_rows] != col_idx.len() || col_idx.len() != values.len() {
            return Err(Error::Shape(
                "row_ptr[N], col_idx and values lengths disagree".into(),
            ));
        }
        for i in 0..n_rows {
            let (lo, hi) = (row_ptr[i], row_ptr[i + 1]);
            if lo > hi {
                return Err(Error::Shape(format!("row_ptr decreases at row {i}")));
            }
            let cols = &col_idx[lo..hi];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Shape(format!("columns of row {i} are not sorted")));
            }
            if cols.last().is_some_and(|&c| c >= n_cols) {
                return Err(Error::Shape(format!("column index out of range in row {i}")));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("CSR values".into()));
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(column, value)` pairs of row `i` in ascending column order.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    /// Entry `(i, j)`, zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                d.set(i, j, v);
            }
        }
        d
    }
}

/// Sparse-dense product `a * b`.
///
/// Each output row accumulates its terms in ascending column order, starting
/// from the first product rather than from zero, so an identity matrix
/// reproduces `b` bit for bit (signed zeros included).
pub fn spmm(a: &CsrMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.n_cols != b.rows() {
        return Err(Error::Shape(format!(
            "cannot multiply {}x{} sparse by {}x{} dense",
            a.n_rows,
            a.n_cols,
            b.rows(),
            b.cols()
        )));
    }
    let cols = b.cols();
    let mut out = DenseMatrix::zeros(a.n_rows, cols);
    for i in 0..a.n_rows {
        let o = out.row_mut(i);
        let mut entries = a.row(i);
        if let Some((j, v)) = entries.next() {
            for (oi, bi) in o.iter_mut().zip(b.row(j)) {
                *oi = v * bi;
            }
        }
        for (j, v) in entries {
            for (oi, bi) in o.iter_mut().zip(b.row(j)) {
                *oi += v * bi;
            }
        }
    }
    Ok(out)
}
