//! Closed-form proximal operators, the gradient mapping and the subgradient
//! implied by a proximal-gradient step.

use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::linalg::Point;
use crate::oracle::CompositeProblem;

/// The supported convex terms `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProxKind {
    /// `h ≡ 0`.
    Zero,
    /// `h(x) = w ‖x‖₁`.
    L1(f64),
    /// Indicator of the nonnegative orthant.
    NonnegIndicator,
    /// Indicator of `{x : lo ≤ x ≤ hi}`.
    BoxIndicator { lo: Point, hi: Point },
    /// `h(x) = (w/2) ‖x‖²`.
    L2Squared(f64),
}

impl ProxKind {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            ProxKind::L1(w) | ProxKind::L2Squared(w) if !(w.is_finite() && *w > 0.0) => {
                usage(format!("prox weight must be positive and finite, got {w}"))
            }
            ProxKind::BoxIndicator { lo, hi } => {
                if lo.len() != dim || hi.len() != dim {
                    return usage(format!(
                        "box bounds have lengths {}/{} but dimension is {dim}",
                        lo.len(),
                        hi.len()
                    ));
                }
                if lo.iter().zip(hi.iter()).any(|(l, h)| !(l <= h)) {
                    return usage("box requires lo <= hi componentwise");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ProxKind::Zero)
    }

    /// `h(x)`, `+∞` outside the domain of an indicator.
    pub fn value(&self, x: &Point) -> f64 {
        match self {
            ProxKind::Zero => 0.0,
            ProxKind::L1(w) => {
                let mut s = 0.0;
                for v in x.iter() {
                    s += v.abs();
                }
                w * s
            }
            ProxKind::NonnegIndicator => {
                if x.iter().all(|&v| v >= 0.0) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ProxKind::BoxIndicator { lo, hi } => {
                let inside = x
                    .iter()
                    .zip(lo.iter().zip(hi.iter()))
                    .all(|(v, (l, h))| l <= v && v <= h);
                if inside {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ProxKind::L2Squared(w) => 0.5 * w * crate::linalg::norm_sq(x),
        }
    }

    /// `prox_{t h}(x) = argmin_y h(y) + ‖y - x‖² / 2t`.
    pub fn apply(&self, x: &Point, t: f64) -> Result<Point> {
        if !(t.is_finite() && t > 0.0) {
            return usage(format!("prox parameter must be positive and finite, got {t}"));
        }
        let out = match self {
            ProxKind::Zero => x.clone(),
            ProxKind::L1(w) => {
                let tau = t * w;
                x.mapv(|v| soft_threshold(v, tau))
            }
            ProxKind::NonnegIndicator => x.mapv(|v| v.max(0.0)),
            ProxKind::BoxIndicator { lo, hi } => {
                let mut y = x.clone();
                for ((v, l), h) in y.iter_mut().zip(lo.iter()).zip(hi.iter()) {
                    *v = v.clamp(*l, *h);
                }
                y
            }
            ProxKind::L2Squared(w) => {
                let scale = 1.0 + t * w;
                x.mapv(|v| v / scale)
            }
        };
        Ok(out)
    }
}

/// Ties at `|v| = tau` go to zero.
pub fn soft_threshold(v: f64, tau: f64) -> f64 {
    if v.abs() <= tau {
        0.0
    } else {
        v - tau.copysign(v)
    }
}

/// `G_η(x) = (x - prox_{ηh}(x - η∇f(x))) / η`.
pub fn gradient_mapping(problem: &CompositeProblem, x: &Point, eta: f64) -> Result<Point> {
    if !(eta.is_finite() && eta > 0.0) {
        return usage(format!("gradient-mapping parameter must be positive, got {eta}"));
    }
    problem.check_point(x)?;
    let grad = problem.smooth.gradient(x);
    let forward = x - &(grad * eta);
    let next = problem.nonsmooth.apply(&forward, eta)?;
    Ok((x - &next) / eta)
}

/// The subgradient `h'(x_next) = (x_k - x_next)/λ_k - ∇f(x_k) ∈ ∂h(x_next)`
/// certified by `x_next = prox_{λ_k h}(x_k - λ_k ∇f(x_k))`.
pub fn implied_subgradient(
    x_k: &Point,
    x_next: &Point,
    grad_k: &Point,
    lambda_k: f64,
) -> Result<Point> {
    if !(lambda_k.is_finite() && lambda_k > 0.0) {
        return usage(format!("step size must be positive, got {lambda_k}"));
    }
    if x_k.len() != x_next.len() || x_k.len() != grad_k.len() {
        return usage("implied_subgradient: dimension mismatch");
    }
    Ok((x_k - x_next) / lambda_k - grad_k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;
    use crate::oracle::SmoothClosure;
    use crate::rng::SeededRng;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn closed_forms() {
        assert_eq!(ProxKind::L1(1.0).apply(&array![3.0], 1.0).unwrap(), array![2.0]);
        assert_eq!(
            ProxKind::NonnegIndicator.apply(&array![-1.0, 2.0], 0.3).unwrap(),
            array![0.0, 2.0]
        );
        assert_eq!(ProxKind::L2Squared(2.0).apply(&array![3.0], 0.5).unwrap(), array![1.5]);
        assert_eq!(ProxKind::Zero.apply(&array![-7.0], 9.0).unwrap(), array![-7.0]);
    }

    #[test]
    fn soft_threshold_tie_is_zero() {
        assert_eq!(soft_threshold(2.0, 2.0), 0.0);
        assert_eq!(soft_threshold(-2.0, 2.0), 0.0);
        assert_eq!(soft_threshold(-3.0, 2.0), -1.0);
    }

    #[test]
    fn degenerate_box_collapses_coordinate() {
        let kind = ProxKind::BoxIndicator {
            lo: array![1.0, -1.0],
            hi: array![1.0, 1.0],
        };
        kind.validate(2).unwrap();
        assert_eq!(kind.apply(&array![5.0, 5.0], 1.0).unwrap(), array![1.0, 1.0]);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(ProxKind::L1(1.0).apply(&array![1.0], 0.0).is_err());
        assert!(ProxKind::L1(1.0).apply(&array![1.0], -1.0).is_err());
        assert!(ProxKind::L1(0.0).validate(1).is_err());
        assert!(ProxKind::L2Squared(-1.0).validate(1).is_err());
        let inverted = ProxKind::BoxIndicator {
            lo: array![1.0],
            hi: array![0.0],
        };
        assert!(inverted.validate(1).is_err());
    }

    fn half_square() -> SmoothClosure {
        SmoothClosure::new(1, |x| 0.5 * x[0] * x[0], |x| x.clone())
    }

    #[test]
    fn gradient_mapping_examples() {
        let p = CompositeProblem::new("q", half_square(), ProxKind::Zero).unwrap();
        assert_eq!(gradient_mapping(&p, &array![3.0], 7.0).unwrap(), array![3.0]);

        // ∇f(0.5) = 2.
        let f = SmoothClosure::new(1, |x| 2.0 * x[0], |_| array![2.0]);
        let p = CompositeProblem::new("lin", f, ProxKind::NonnegIndicator).unwrap();
        assert_eq!(gradient_mapping(&p, &array![0.5], 1.0).unwrap(), array![0.5]);
        assert!(gradient_mapping(&p, &array![0.5], 0.0).is_err());
    }

    #[test]
    fn implied_subgradient_examples() {
        let h0 = implied_subgradient(&array![2.0], &array![1.0], &array![1.0], 1.0).unwrap();
        assert_eq!(h0, array![0.0]);

        let x_next = ProxKind::L1(1.0).apply(&array![3.0], 1.0).unwrap();
        let v = implied_subgradient(&array![3.0], &x_next, &array![0.0], 1.0).unwrap();
        assert_eq!(x_next, array![2.0]);
        assert_eq!(v, array![1.0]);
        assert!(implied_subgradient(&array![3.0], &x_next, &array![0.0], 0.0).is_err());
    }

    fn random_kind(rng: &mut SeededRng, dim: usize) -> ProxKind {
        match (rng.uniform() * 5.0) as usize {
            0 => ProxKind::Zero,
            1 => ProxKind::L1(0.1 + 2.0 * rng.uniform()),
            2 => ProxKind::NonnegIndicator,
            3 => {
                let a = Point::from(rng.normals(dim));
                let b = Point::from(rng.normals(dim));
                let lo = ndarray::Zip::from(&a).and(&b).map_collect(|x, y| x.min(*y));
                let hi = ndarray::Zip::from(&a).and(&b).map_collect(|x, y| x.max(*y));
                ProxKind::BoxIndicator { lo, hi }
            }
            _ => ProxKind::L2Squared(0.1 + 2.0 * rng.uniform()),
        }
    }

    /// Brute-force check of the prox minimization property against random
    /// competitors `z` drawn around the input and inside the domain.
    #[test]
    fn prox_output_minimizes_the_prox_objective() {
        let mut rng = SeededRng::new(11);
        for case in 0..1000 {
            let dim = 1 + case % 4;
            let kind = random_kind(&mut rng, dim);
            let x = Point::from(rng.normals(dim)) * 3.0;
            let t = 0.05 + 3.0 * rng.uniform();
            let y = kind.apply(&x, t).unwrap();
            let objective = |z: &Point| kind.value(z) + crate::linalg::norm_sq(&(z - &x)) / (2.0 * t);
            let best = objective(&y);
            assert!(best.is_finite());
            for _ in 0..1000 {
                let z = &y + &(Point::from(rng.normals(dim)) * rng.uniform());
                let z = match &kind {
                    // Project competitors into the domain so they are informative.
                    ProxKind::NonnegIndicator | ProxKind::BoxIndicator { .. } => {
                        kind.apply(&z, 1.0).unwrap()
                    }
                    _ => z,
                };
                assert!(objective(&z) >= best - 1e-10, "case {case} kind {kind:?}");
            }
        }
    }

    #[test]
    fn lasso_implied_subgradient_satisfies_subgradient_inequality() {
        let mut rng = SeededRng::new(5);
        let h = ProxKind::L1(0.7);
        let x_k = Point::from(rng.normals(6));
        let grad = Point::from(rng.normals(6));
        let lambda = 0.8;
        let x_next = h.apply(&(&x_k - &(&grad * lambda)), lambda).unwrap();
        let sub = implied_subgradient(&x_k, &x_next, &grad, lambda).unwrap();
        for _ in 0..100 {
            let y = Point::from(rng.normals(6)) * 4.0;
            let rhs = h.value(&x_next) + crate::linalg::dot(&sub, &(&y - &x_next));
            assert!(h.value(&y) >= rhs - 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn prox_is_nonexpansive(
            seed in any::<u64>(),
            t in 0.01f64..10.0,
            xs in proptest::collection::vec(-10.0f64..10.0, 4),
            ys in proptest::collection::vec(-10.0f64..10.0, 4),
        ) {
            let mut rng = SeededRng::new(seed);
            let kind = random_kind(&mut rng, 4);
            let x = Point::from(xs);
            let y = Point::from(ys);
            let px = kind.apply(&x, t).unwrap();
            let py = kind.apply(&y, t).unwrap();
            prop_assert!(norm(&(&px - &py)) <= norm(&(&x - &y)) * (1.0 + 1e-15) + 1e-15);
        }
    }
}
