use ndarray::{Array2, ArrayView2};

use crate::error::{usage, Result};
use crate::linalg::Point;

/// Shape of a factor pair `(U, V)` with `U: rows_u × rank`, `V: rows_v × rank`.
///
/// Points are laid out as `[vec(U); vec(V)]`, each factor row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorShape {
    pub rows_u: usize,
    pub rows_v: usize,
    pub rank: usize,
}

impl FactorShape {
    pub fn new(rows_u: usize, rows_v: usize, rank: usize) -> Result<Self> {
        if rows_u == 0 || rows_v == 0 || rank == 0 {
            return usage("factor dimensions must be positive");
        }
        Ok(Self {
            rows_u,
            rows_v,
            rank,
        })
    }

    pub fn dim(&self) -> usize {
        (self.rows_u + self.rows_v) * self.rank
    }

    pub fn split<'a>(&self, x: &'a Point) -> (ArrayView2<'a, f64>, ArrayView2<'a, f64>) {
        let data = x.as_slice().expect("points are contiguous");
        let cut = self.rows_u * self.rank;
        let u = ArrayView2::from_shape((self.rows_u, self.rank), &data[..cut]).unwrap();
        let v = ArrayView2::from_shape((self.rows_v, self.rank), &data[cut..]).unwrap();
        (u, v)
    }

    pub fn join(&self, u: &Array2<f64>, v: &Array2<f64>) -> Point {
        let mut out = Vec::with_capacity(self.dim());
        out.extend(u.iter().copied());
        out.extend(v.iter().copied());
        Point::from(out)
    }
}
