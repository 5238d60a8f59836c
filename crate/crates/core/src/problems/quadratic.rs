use ndarray::Array2;

use crate::error::{usage, Result};
use crate::linalg::{gram_spectral_norm_sq, Point};
use crate::oracle::{CompositeProblem, SmoothFn};
use crate::prox::ProxKind;

/// `f(x) = ½ xᵀQx` for symmetric `Q`; `L` is the spectral radius of `Q`.
pub struct Quadratic {
    q: Array2<f64>,
    lipschitz: f64,
}

impl Quadratic {
    pub fn new(q: Array2<f64>) -> Result<Self> {
        let n = q.nrows();
        if n == 0 || q.ncols() != n {
            return usage(format!("quadratic form must be square, got {:?}", q.dim()));
        }
        for i in 0..n {
            for j in 0..i {
                if q[[i, j]] != q[[j, i]] {
                    return usage(format!("quadratic form is not symmetric at ({i}, {j})"));
                }
            }
        }
        let lipschitz = gram_spectral_norm_sq(&q).sqrt();
        Ok(Self { q, lipschitz })
    }
}

impl SmoothFn for Quadratic {
    fn dim(&self) -> usize {
        self.q.nrows()
    }

    fn value(&self, x: &Point) -> f64 {
        self.value_and_gradient(x).0
    }

    fn gradient(&self, x: &Point) -> Point {
        self.q.dot(x)
    }

    fn value_and_gradient(&self, x: &Point) -> (f64, Point) {
        let g = self.q.dot(x);
        (0.5 * crate::linalg::dot(x, &g), g)
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.lipschitz)
    }
}

/// Unconstrained quadratic, `h ≡ 0`. Callers attach `F* = 0` when `Q` is
/// positive semidefinite.
pub fn quadratic_problem(q: Array2<f64>) -> Result<CompositeProblem> {
    CompositeProblem::new("quadratic", Quadratic::new(q)?, ProxKind::Zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn diagonal_form() {
        let f = Quadratic::new(Array2::from_diag(&array![-1.0, 2.0])).unwrap();
        let (v, g) = f.value_and_gradient(&array![1.0, 1.0]);
        assert_eq!(v, 0.5);
        assert_eq!(g, array![-1.0, 2.0]);
        assert!((f.lipschitz().unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn asymmetric_rejected() {
        assert!(Quadratic::new(array![[1.0, 2.0], [0.0, 1.0]]).is_err());
        assert!(Quadratic::new(Array2::zeros((2, 3))).is_err());
    }
}
