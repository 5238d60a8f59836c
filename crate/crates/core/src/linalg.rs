//! Dense vector helpers.
//!
//! Every reduction here runs left to right in a single accumulator so that
//! traces are bit-reproducible and can be matched by straight-line reference
//! code in tests.

use ndarray::{Array1, Array2};

/// A dense iterate (and every gradient-like quantity).
pub type Point = Array1<f64>;

pub fn dot(a: &Point, b: &Point) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x * y;
    }
    acc
}

pub fn norm_sq(a: &Point) -> f64 {
    dot(a, a)
}

pub fn norm(a: &Point) -> f64 {
    norm_sq(a).sqrt()
}

/// `‖a - b‖` without allocating.
pub fn dist(a: &Point, b: &Point) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        let d = x - y;
        acc += d * d;
    }
    acc.sqrt()
}

pub fn all_finite(a: &Point) -> bool {
    a.iter().all(|v| v.is_finite())
}

/// Largest eigenvalue of a symmetric positive semidefinite operator by power
/// iteration from the all-ones vector.
///
/// Stops after `max_iters` or once the Rayleigh estimate changes by less than
/// `rel_tol` relative to its magnitude.
pub fn power_iteration<F>(dim: usize, mut apply: F, max_iters: usize, rel_tol: f64) -> f64
where
    F: FnMut(&Point) -> Point,
{
    let mut v = Point::from_elem(dim, 1.0 / (dim as f64).sqrt());
    let mut estimate = 0.0;
    for _ in 0..max_iters {
        let w = apply(&v);
        let next = dot(&v, &w);
        let wn = norm(&w);
        if wn == 0.0 {
            return 0.0;
        }
        v = w / wn;
        let converged = (next - estimate).abs() <= rel_tol * next.abs();
        estimate = next;
        if converged {
            break;
        }
    }
    estimate
}

/// `λ_max(AᵀA)` for a dense matrix.
pub fn gram_spectral_norm_sq(a: &Array2<f64>) -> f64 {
    power_iteration(a.ncols(), |v| a.t().dot(&a.dot(v)), 1000, 1e-10)
}
