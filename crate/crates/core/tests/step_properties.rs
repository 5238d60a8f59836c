use adaprox::*;
use ndarray::Array1;
use proptest::prelude::*;

fn curvature() -> impl Strategy<Value = CurvaturePair> {
    (1e-6f64..1e3, -1e3f64..1e3).prop_map(|(upper, lower)| CurvaturePair { upper, lower })
}

fn condition(lambda: f64, lambda_prev: f64, c: CurvaturePair) -> f64 {
    lambda * lambda * c.upper * c.upper + lambda * lambda / lambda_prev * c.lower
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn adapgnc_step_satisfies_step_condition(lp in 1e-4f64..1e2, rho in 0.0f64..1e3, c in curvature()) {
        let lam = adapgnc_step(lp, rho, c).unwrap();
        prop_assert!(lam > 0.0 && lam.is_finite());
        prop_assert!(condition(lam, lp, c) <= 1.0 + 1e-12);
        prop_assert!(lam <= (1.0 + rho).sqrt() * lp);
    }

    #[test]
    fn relaxed_step_satisfies_step_condition(lp in 1e-4f64..1e2, rho in 0.0f64..1e3, c in curvature()) {
        let lam = relaxed_step(lp, rho, c).unwrap();
        prop_assert!(condition(lam, lp, c) <= 1.0 + 1e-12);
        prop_assert!(lam <= (1.0 + rho).sqrt() * lp);
    }

    #[test]
    fn convex_branch_is_the_plain_minimum(lp in 1e-4f64..1e2, rho in 0.0f64..1e3, upper in 1e-6f64..1e3, lower in -1e3f64..=0.0) {
        let c = CurvaturePair { upper, lower };
        prop_assert_eq!(adapgnc_step(lp, rho, c).unwrap(), ((1.0 + rho).sqrt() * lp).min(1.0 / upper));
    }

    #[test]
    fn relaxed_is_never_smaller(lp in 1e-4f64..1e2, rho in 0.0f64..1e3, upper in 1e-6f64..1e3, lower in 1e-6f64..1e3) {
        let c = CurvaturePair { upper, lower };
        let strict = adapgnc_step(lp, rho, c).unwrap();
        let relaxed = relaxed_step(lp, rho, c).unwrap();
        prop_assert!(relaxed >= strict * (1.0 - 1e-15));
    }

    #[test]
    fn bb_term_is_at_most_inverse_secant_curvature(
        dx in prop::collection::vec(-10.0f64..10.0, 3),
        m in prop::collection::vec(0.01f64..5.0, 3),
    ) {
        // dg = M dx with M diagonal positive, so the inner product is positive.
        let dx = Array1::from(dx);
        prop_assume!(linalg::norm(&dx) > 1e-6);
        let dg = &dx * &Array1::from(m);
        let term = bb_term(&dx, &dg).unwrap();
        let secant = linalg::norm(&dg) / linalg::norm(&dx);
        prop_assert!(term <= (1.0 / secant) * (1.0 + 1e-12));
    }

    #[test]
    fn rho1_never_exceeds_rho2(k in 1usize..100_000, ratio in 1e-6f64..1e6) {
        let r1 = RhoSequence::rho1().value(k, Some(ratio)).unwrap();
        let r2 = RhoSequence::rho2().value(k, None).unwrap();
        prop_assert!(r1 >= 0.0 && r1 <= r2);
    }

    #[test]
    fn curvature_of_a_convex_quadratic_is_nonpositive(
        d in prop::collection::vec(0.0f64..10.0, 4),
        xp in prop::collection::vec(-5.0f64..5.0, 4),
        xc in prop::collection::vec(-5.0f64..5.0, 4),
    ) {
        let d = Array1::from(d);
        let (xp, xc) = (Array1::from(xp), Array1::from(xc));
        prop_assume!(linalg::dist(&xp, &xc) > 1e-3);
        let f = |x: &Point| 0.5 * x.iter().zip(d.iter()).map(|(v, a)| a * v * v).sum::<f64>();
        let state = StepState {
            k: 1,
            f_prev: f(&xp),
            f_cur: f(&xc),
            grad_prev: &xp * &d,
            grad_cur: &xc * &d,
            x_prev: xp,
            x_cur: xc,
            lambda_prev: 1.0,
            lambda_prevprev: 0.0,
        };
        let c = estimate_curvature(&state).unwrap();
        prop_assert!(c.lower <= 0.0);
        prop_assert!(c.upper <= d.iter().cloned().fold(0.0, f64::max) * (1.0 + 1e-12));
    }
}
