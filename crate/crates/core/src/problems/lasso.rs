use ndarray::Array2;

use super::ProblemInstance;
use crate::error::{usage, Result};
use crate::linalg::{gram_spectral_norm_sq, norm_sq, Point};
use crate::oracle::{CompositeProblem, SmoothFn};
use crate::prox::ProxKind;
use crate::rng::SeededRng;

/// `f(x) = ½‖Ax - b‖²`.
pub struct LeastSquares {
    a: Array2<f64>,
    b: Point,
    lipschitz: f64,
}

impl LeastSquares {
    pub fn new(a: Array2<f64>, b: Point) -> Result<Self> {
        if a.nrows() != b.len() || a.ncols() == 0 {
            return usage(format!(
                "design is {}x{} but observations have length {}",
                a.nrows(),
                a.ncols(),
                b.len()
            ));
        }
        let lipschitz = gram_spectral_norm_sq(&a);
        Ok(Self { a, b, lipschitz })
    }
}

impl SmoothFn for LeastSquares {
    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn value(&self, x: &Point) -> f64 {
        0.5 * norm_sq(&(self.a.dot(x) - &self.b))
    }

    fn gradient(&self, x: &Point) -> Point {
        self.a.t().dot(&(self.a.dot(x) - &self.b))
    }

    fn value_and_gradient(&self, x: &Point) -> (f64, Point) {
        let r = self.a.dot(x) - &self.b;
        (0.5 * norm_sq(&r), self.a.t().dot(&r))
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.lipschitz)
    }
}

/// `½‖Ax - b‖² + w‖x‖₁` with known `L = λ_max(AᵀA)`.
pub fn lasso_problem(a: Array2<f64>, b: Point, l1_weight: f64) -> Result<CompositeProblem> {
    CompositeProblem::new("lasso", LeastSquares::new(a, b)?, ProxKind::L1(l1_weight))
}

/// Gaussian design scaled by `1/√m`, a sparse planted signal (one nonzero in
/// ten), small observation noise, and `w = 0.1 ‖Aᵀb‖_∞`.
pub fn lasso_synthetic(m: usize, n: usize, seed: u64) -> (Array2<f64>, Point, f64) {
    let mut rng = SeededRng::new(seed);
    let scale = 1.0 / (m as f64).sqrt();
    let a = Array2::from_shape_vec((m, n), rng.normals(m * n))
        .expect("shape matches draw count")
        * scale;
    let support = rng.sample_distinct(n, (n / 10).max(1));
    let mut truth = Point::zeros(n);
    for j in support {
        truth[j] = rng.normal();
    }
    let noise = Point::from(rng.normals(m)) * 0.01;
    let b = a.dot(&truth) + noise;
    let weight = 0.1 * a.t().dot(&b).iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    (a, b, weight)
}

/// Synthetic lasso started from the origin.
pub fn lasso_instance(m: usize, n: usize, seed: u64) -> Result<ProblemInstance> {
    let (a, b, w) = lasso_synthetic(m, n, seed);
    Ok(ProblemInstance {
        problem: lasso_problem(a, b, w)?,
        x0: Point::zeros(n),
    })
}
