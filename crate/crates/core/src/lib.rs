//! Adaptive proximal-gradient methods for composite problems `min f(x) + h(x)`
//! with smooth, possibly nonconvex `f` and prox-friendly convex `h`.
//!
//! The step size adapts to secant estimates of the upper and lower curvature
//! of `f`, so no Lipschitz constant is needed. Alongside the solvers the crate
//! ships a monitor that replays a finished trace and checks the descent,
//! step-size and complexity inequalities the method is known to satisfy.
//!
//! ```
//! use adaprox::{run, quadratic_problem, Engine, RhoSequence, SolverConfig, Termination};
//! use ndarray::{array, Array2};
//!
//! let problem = quadratic_problem(Array2::from_diag(&array![1.0, 10.0])).unwrap();
//! let config = SolverConfig::new(Engine::AdaPgnc, RhoSequence::rho2())
//!     .with_tol(1e-10)
//!     .with_max_iters(500);
//! let out = run(&problem, &array![1.0, 1.0], &config).unwrap();
//! assert_eq!(out.trace.termination, Termination::Tol);
//! ```

pub mod error;
pub mod linalg;
pub mod oracle;
pub mod problems;
pub mod prox;
pub mod rng;
pub mod solver;
pub mod step;

pub use error::{Error, Result};
pub use linalg::Point;
pub use oracle::{
    finite_difference_gradient, CompositeProblem, EvalCounters, Oracle, ProblemInfo,
    SmoothClosure, SmoothFn,
};
pub use problems::*;
pub use prox::{gradient_mapping, implied_subgradient, soft_threshold, ProxKind};
pub use rng::SeededRng;
pub use solver::ergodic::{ergodic_average, ErgodicAverager};
pub use solver::monitor::{monitor_check, CheckKind, CheckResult, MonitorBounds, MonitorReport};
pub use solver::{
    init_first_step, iterate, run, Engine, IterationRecord, RunOutput, RunState, SolverConfig,
    Termination, Trace,
};
pub use step::{
    adapgnc_step, adgd_step, armijo_search, bb_step, bb_term, estimate_curvature, relaxed_step,
    CurvaturePair, RhoKind, RhoSequence, StepState,
};
