use crate::error::{usage, Result};
use crate::linalg::Point;

/// Row-compressed design matrix with binary labels.
///
/// Column indices are 0-based and strictly increasing within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDesign {
    n_cols: usize,
    row_ptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
    labels: Vec<f64>,
}

impl SparseDesign {
    pub fn new(n_cols: usize) -> Self {
        Self {
            n_cols,
            row_ptr: vec![0],
            indices: Vec::new(),
            values: Vec::new(),
            labels: Vec::new(),
        }
    }

    /// Appends a row. `label` must be 0 or 1.
    pub fn push_row(&mut self, entries: &[(usize, f64)], label: f64) -> Result<()> {
        if label != 0.0 && label != 1.0 {
            return usage(format!("label must be 0 or 1, got {label}"));
        }
        for (pos, &(idx, val)) in entries.iter().enumerate() {
            if idx >= self.n_cols {
                return usage(format!("column {idx} out of range for {} columns", self.n_cols));
            }
            if pos > 0 && entries[pos - 1].0 >= idx {
                return usage("column indices must be strictly increasing within a row");
            }
            if !val.is_finite() {
                return usage(format!("non-finite design value at column {idx}"));
            }
        }
        for &(idx, val) in entries {
            self.indices.push(idx);
            self.values.push(val);
        }
        self.row_ptr.push(self.indices.len());
        self.labels.push(label);
        Ok(())
    }

    /// Grows the column count, e.g. after parsing reveals a larger index.
    pub fn set_n_cols(&mut self, n_cols: usize) -> Result<()> {
        if self.indices.iter().any(|&i| i >= n_cols) {
            return usage("cannot shrink below the largest stored column index");
        }
        self.n_cols = n_cols;
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn row_dot(&self, i: usize, x: &Point) -> f64 {
        let (idx, val) = self.row(i);
        let mut acc = 0.0;
        for (&j, &v) in idx.iter().zip(val) {
            acc += v * x[j];
        }
        acc
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &Point) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.row_dot(i, x)).collect()
    }

    /// `Aᵀ r`.
    pub fn mul_t_vec(&self, r: &[f64]) -> Point {
        let mut out = Point::zeros(self.n_cols);
        for (i, &ri) in r.iter().enumerate() {
            let (idx, val) = self.row(i);
            for (&j, &v) in idx.iter().zip(val) {
                out[j] += v * ri;
            }
        }
        out
    }

    /// `λ_max(AᵀA)` by power iteration (all-ones start, 1000 iterations, 1e-10 relative).
    pub fn gram_top_eigenvalue(&self) -> f64 {
        crate::linalg::power_iteration(
            self.n_cols,
            |v| self.mul_t_vec(&self.mul_vec(v)),
            1000,
            1e-10,
        )
    }
}
