//! Nonnegative matrix factorization, `min ½‖UVᵀ - A‖_F²` over `U, V ≥ 0`.
//!
//! The objective is quartic in `(U, V)`, so its gradient is not globally
//! Lipschitz; the problem is flagged as not globally smooth.

use ndarray::{Array2, Zip};

use super::{FactorShape, ProblemInstance};
use crate::error::{usage, Result};
use crate::linalg::Point;
use crate::oracle::{CompositeProblem, SmoothFn};
use crate::prox::ProxKind;
use crate::rng::SeededRng;

pub struct Nmf {
    a: Array2<f64>,
    shape: FactorShape,
}

impl Nmf {
    pub fn new(a: Array2<f64>, shape: FactorShape) -> Result<Self> {
        if a.dim() != (shape.rows_u, shape.rows_v) {
            return usage(format!(
                "data matrix is {:?} but factors need {}x{}",
                a.dim(),
                shape.rows_u,
                shape.rows_v
            ));
        }
        Ok(Self { a, shape })
    }

    fn residual(&self, x: &Point) -> Array2<f64> {
        let (u, v) = self.shape.split(x);
        u.dot(&v.t()) - &self.a
    }
}

fn half_frobenius_sq(r: &Array2<f64>) -> f64 {
    let mut acc = 0.0;
    for v in r.iter() {
        acc += v * v;
    }
    0.5 * acc
}

impl SmoothFn for Nmf {
    fn dim(&self) -> usize {
        self.shape.dim()
    }

    fn value(&self, x: &Point) -> f64 {
        half_frobenius_sq(&self.residual(x))
    }

    fn gradient(&self, x: &Point) -> Point {
        self.value_and_gradient(x).1
    }

    fn value_and_gradient(&self, x: &Point) -> (f64, Point) {
        let (u, v) = self.shape.split(x);
        let r = u.dot(&v.t()) - &self.a;
        let gu = r.dot(&v);
        let gv = r.t().dot(&u);
        (half_frobenius_sq(&r), self.shape.join(&gu, &gv))
    }
}

/// NMF of an `n × m` matrix with factors `U: n × r`, `V: m × r`.
pub fn nmf_problem(a: Array2<f64>, shape: FactorShape) -> Result<CompositeProblem> {
    Ok(
        CompositeProblem::new("nmf", Nmf::new(a, shape)?, ProxKind::NonnegIndicator)?
            .with_globally_smooth(false),
    )
}

/// `C Bᵀ` after zeroing negative entries of both factors.
pub fn nonneg_product(c: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let clip = |m: &Array2<f64>| m.mapv(|v| v.max(0.0));
    clip(c).dot(&clip(b).t())
}

/// Rank-`r` nonnegative `n × m` data: `B` (`m × r`) then `C` (`n × r`) are
/// drawn standard normal, negatives are zeroed, and `A = C Bᵀ`.
pub fn nmf_synthetic(n: usize, r: usize, m: usize, seed: u64) -> Array2<f64> {
    let mut rng = SeededRng::new(seed);
    nmf_data(&mut rng, n, r, m)
}

fn nmf_data(rng: &mut SeededRng, n: usize, r: usize, m: usize) -> Array2<f64> {
    let b = Array2::from_shape_vec((m, r), rng.normals(m * r)).expect("shape");
    let c = Array2::from_shape_vec((n, r), rng.normals(n * r)).expect("shape");
    nonneg_product(&c, &b)
}

/// Synthetic NMF instance; the start `(U₀, V₀)` is uniform on `[0, 1)`, drawn
/// from the same stream after the data.
pub fn nmf_instance(n: usize, r: usize, m: usize, seed: u64) -> Result<ProblemInstance> {
    let shape = FactorShape::new(n, m, r)?;
    let mut rng = SeededRng::new(seed);
    let a = nmf_data(&mut rng, n, r, m);
    let x0 = Point::from(rng.uniforms(shape.dim()));
    Ok(ProblemInstance {
        problem: nmf_problem(a, shape)?,
        x0,
    })
}

#[allow(dead_code)]
fn all_nonnegative(a: &Array2<f64>) -> bool {
    Zip::from(a).all(|&v| v >= 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;
    use ndarray::array;

    #[test]
    fn scalar_chain_rule() {
        let f = Nmf::new(array![[5.0]], FactorShape::new(1, 1, 1).unwrap()).unwrap();
        let (v, g) = f.value_and_gradient(&array![2.0, 3.0]);
        assert_eq!(v, 0.5);
        assert_eq!(g, array![3.0, 2.0]);
    }

    #[test]
    fn zero_factors() {
        let a = array![[1.0, 2.0, 0.0], [0.5, 0.0, 3.0]];
        let f = Nmf::new(a, FactorShape::new(2, 3, 2).unwrap()).unwrap();
        let x = Point::zeros(10);
        assert_eq!(f.value(&x), 0.5 * (1.0 + 4.0 + 0.25 + 9.0));
        assert_eq!(norm(&f.gradient(&x)), 0.0);
    }

    #[test]
    fn shape_mismatch() {
        assert!(Nmf::new(Array2::zeros((2, 3)), FactorShape::new(3, 2, 1).unwrap()).is_err());
    }

    #[test]
    fn negative_draws_give_zero_data() {
        let b = array![[-1.0], [-0.2]];
        let c = array![[-3.0], [-0.1], [-2.0]];
        assert_eq!(nonneg_product(&c, &b), Array2::<f64>::zeros((3, 2)));
    }

    #[test]
    fn synthetic_data_is_nonnegative() {
        for seed in 0..20 {
            assert!(all_nonnegative(&nmf_synthetic(7, 2, 5, seed)));
        }
        assert_eq!(nmf_synthetic(7, 2, 5, 1).dim(), (7, 5));
    }

    #[test]
    fn problem_is_not_attested_smooth() {
        let p = nmf_problem(Array2::zeros((2, 2)), FactorShape::new(2, 2, 1).unwrap()).unwrap();
        assert!(!p.globally_smooth);
        assert_eq!(p.known_lipschitz(), None);
    }
}
