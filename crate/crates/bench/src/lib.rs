//! Shared fixtures for the criterion benchmarks.

use adaprox::{
    lasso_instance, logistic_instance, monitor_check, nmf_instance, run, CurvaturePair,
    MonitorReport, Point, ProblemInstance, SeededRng, SolverConfig, StepState, Trace,
};

/// The desk-scale instances the acceptance suite also uses.
pub fn logistic() -> ProblemInstance {
    logistic_instance(200, 20, 0).expect("valid sizes")
}

pub fn lasso() -> ProblemInstance {
    lasso_instance(100, 50, 0).expect("valid sizes")
}

pub fn nmf() -> ProblemInstance {
    nmf_instance(200, 5, 300, 0).expect("valid sizes")
}

/// A curvature window on a random quadratic-like pair of points in `dim`
/// dimensions.
pub fn step_state(dim: usize, seed: u64) -> StepState {
    let mut rng = SeededRng::new(seed);
    let x_prev = Point::from(rng.normals(dim));
    let x_cur = Point::from(rng.normals(dim));
    let scale = Point::from(rng.uniforms(dim));
    let f = |x: &Point| 0.5 * (x * x * &scale).sum();
    StepState {
        k: 5,
        f_prev: f(&x_prev),
        f_cur: f(&x_cur),
        grad_prev: &x_prev * &scale,
        grad_cur: &x_cur * &scale,
        x_prev,
        x_cur,
        lambda_prev: 0.5,
        lambda_prevprev: 0.4,
    }
}

/// Curvature pairs covering both AdaPGNC branches.
pub fn curvature_pairs(n: usize, seed: u64) -> Vec<CurvaturePair> {
    let mut rng = SeededRng::new(seed);
    (0..n)
        .map(|_| CurvaturePair {
            upper: 1e-3 + 10.0 * rng.uniform(),
            lower: 10.0 * rng.normal(),
        })
        .collect()
}

/// A finished logistic trace with `F*` attached, ready for the monitor.
pub fn monitored_trace(iters: usize) -> (Trace, adaprox::ProblemInfo) {
    let inst = logistic();
    let out = run(&inst.problem, &inst.x0, &SolverConfig::adapgnc_2().with_max_iters(iters))
        .expect("logistic run succeeds");
    let mut info = inst.problem.info();
    info.known_fstar = Some(out.trace.best_objective() - 1e-12);
    (out.trace, info)
}

pub fn replay(trace: &Trace, info: &adaprox::ProblemInfo) -> MonitorReport {
    monitor_check(trace, info, trace.rho.total()).expect("adaptive trace")
}
