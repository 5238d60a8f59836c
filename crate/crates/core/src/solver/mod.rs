//! The single-loop proximal-gradient driver shared by every step-size engine.
//!
//! Iteration `k ≥ 1` evaluates `f` and `∇f` at `x_k` once (fused), estimates
//! the local curvature from the previous iterate, picks `λ_k`, and takes
//! `x_{k+1} = prox_{λ_k h}(x_k - λ_k ∇f(x_k))`. The record for row `k` carries
//! `F(x_k)`, `λ_k` and `‖G_k‖ = ‖x_{k+1} - x_k‖/λ_k`; row 0 describes the
//! initial step from `x_0`.

pub mod ergodic;
pub mod monitor;

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::linalg::{dist, norm, Point};
use crate::oracle::{CompositeProblem, EvalCounters, Oracle};
use crate::step::{
    adapgnc_step, adgd_step, armijo_search, bb_term, estimate_curvature, relaxed_step,
    RhoSequence, StepState,
};

use monitor::{monitor_check, MonitorReport};

/// Step-size rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    /// Convex/nonconvex branch rule driven by `(L_k, l_k)`.
    AdaPgnc,
    /// `min{√(1+ρ)λ_{k-1}, ([L_k² + l_k/λ_{k-1}]₊)^{-1/2}}`.
    AdaPgncRelaxed,
    /// Growth-capped short Barzilai–Borwein step; convex `f` only.
    AdaPgncBb,
    /// Adaptive gradient descent with `θ_k = λ_{k-1}/λ_{k-2}` and `1/(2L_k)`.
    AdGd,
    FixedStep(f64),
    /// Armijo backtracking from `1e-3` on `f` at every iteration.
    GdLs,
}

impl Engine {
    pub fn uses_rho(&self) -> bool {
        matches!(self, Engine::AdaPgnc | Engine::AdaPgncRelaxed | Engine::AdaPgncBb)
    }

    pub fn short_name(&self) -> &'static str {
        match self {
            Engine::AdaPgnc => "adapgnc",
            Engine::AdaPgncRelaxed => "relaxed",
            Engine::AdaPgncBb => "bb",
            Engine::AdGd => "adgd",
            Engine::FixedStep(_) => "fixed",
            Engine::GdLs => "gdls",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Engine::FixedStep(s) => write!(f, "fixed({s})"),
            other => f.write_str(other.short_name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub name: String,
    pub engine: Engine,
    pub rho: RhoSequence,
    pub lambda0: f64,
    pub max_iters: usize,
    pub max_seconds: f64,
    pub gradmap_tol: f64,
    /// Run [`monitor_check`] on the finished trace.
    pub monitor: bool,
    /// Keep every iterate `x_0, …, x_{K+1}` in the trace.
    pub keep_iterates: bool,
}

impl SolverConfig {
    /// `λ₀ = 1`, 1000 iterations, no time limit, tolerance 0, monitor off.
    pub fn new(engine: Engine, rho: RhoSequence) -> Self {
        Self {
            name: engine.to_string(),
            engine,
            rho,
            lambda0: 1.0,
            max_iters: 1000,
            max_seconds: f64::INFINITY,
            gradmap_tol: 0.0,
            monitor: false,
            keep_iterates: false,
        }
    }

    pub fn adapgnc_1() -> Self {
        Self::new(Engine::AdaPgnc, RhoSequence::rho1()).with_name("AdaPGNC-1")
    }

    pub fn adapgnc_2() -> Self {
        Self::new(Engine::AdaPgnc, RhoSequence::rho2()).with_name("AdaPGNC-2")
    }

    pub fn adapgnc_bb_1() -> Self {
        Self::new(Engine::AdaPgncBb, RhoSequence::rho1()).with_name("AdaPGNC-BB-1")
    }

    pub fn adapgnc_bb_2() -> Self {
        Self::new(Engine::AdaPgncBb, RhoSequence::rho2()).with_name("AdaPGNC-BB-2")
    }

    pub fn adgd() -> Self {
        Self::new(Engine::AdGd, RhoSequence::zero()).with_name("AdGD")
    }

    pub fn gd_ls() -> Self {
        Self::new(Engine::GdLs, RhoSequence::zero()).with_name("GD-LS")
    }

    pub fn fixed(step: f64) -> Self {
        Self::new(Engine::FixedStep(step), RhoSequence::zero()).with_name("Fixed")
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_lambda0(mut self, lambda0: f64) -> Self {
        self.lambda0 = lambda0;
        self
    }

    pub fn with_max_iters(mut self, n: usize) -> Self {
        self.max_iters = n;
        self
    }

    pub fn with_max_seconds(mut self, s: f64) -> Self {
        self.max_seconds = s;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.gradmap_tol = tol;
        self
    }

    pub fn with_monitor(mut self, on: bool) -> Self {
        self.monitor = on;
        self
    }

    pub fn with_iterates(mut self, keep: bool) -> Self {
        self.keep_iterates = keep;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda0.is_finite() && self.lambda0 > 0.0) {
            return usage(format!("lambda0 must be positive, got {}", self.lambda0));
        }
        if let Engine::FixedStep(s) = self.engine {
            if !(s.is_finite() && s > 0.0) {
                return usage(format!("fixed step must be positive, got {s}"));
            }
        }
        if !(self.max_seconds > 0.0) {
            return usage(format!("max_seconds must be positive, got {}", self.max_seconds));
        }
        if !(self.gradmap_tol >= 0.0) {
            return usage(format!("gradmap_tol must be nonnegative, got {}", self.gradmap_tol));
        }
        if !(self.rho.rho0.is_finite() && self.rho.rho0 >= 0.0) {
            return usage(format!("rho0 must be nonnegative, got {}", self.rho.rho0));
        }
        if let crate::step::RhoKind::Custom(t) = &self.rho.kind {
            if t.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return usage("custom rho table must be nonnegative and finite");
            }
        }
        if self.monitor && !self.engine.uses_rho() {
            return usage(format!("the monitor does not cover the {} engine", self.engine));
        }
        Ok(())
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Tol,
    MaxIters,
    MaxSeconds,
    /// Consecutive iterates coincided (or the gradient vanished for the line
    /// search), so the run sits at a fixed point.
    Stagnation,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Tol => "tol",
            Termination::MaxIters => "max_iters",
            Termination::MaxSeconds => "max_seconds",
            Termination::Stagnation => "stagnation",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "tol" => Termination::Tol,
            "max_iters" => Termination::MaxIters,
            "max_seconds" => Termination::MaxSeconds,
            "stagnation" => Termination::Stagnation,
            _ => return None,
        })
    }
}

/// One trace row. Curvature fields are NaN where they do not exist (row 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub f_value: f64,
    pub composite_value: f64,
    /// `‖x_{k+1} - x_k‖ / λ_k`.
    pub gradmap_norm: f64,
    pub lambda: f64,
    pub upper_curv: f64,
    pub lower_curv: f64,
    /// `ρ_{k-1}`, the growth parameter consumed by this step (0 on row 0).
    pub rho_used: f64,
    /// Short BB term, for the BB engine.
    pub bb_term: Option<f64>,
    /// `‖∇f(x_k) + h'(x_k)‖` with `h'(x_k)` implied by the previous prox step.
    pub residual: Option<f64>,
    pub elapsed_s: f64,
    pub counters: EvalCounters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub engine: Engine,
    pub rho: RhoSequence,
    pub lambda0: f64,
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
    /// `x_0, …, x_{K+1}` when retained.
    pub iterates: Option<Vec<Point>>,
}

impl Trace {
    /// Number of iterations after initialization.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    /// `min_k ‖G_k‖`.
    pub fn best_gradmap(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.gradmap_norm)
            .fold(f64::INFINITY, f64::min)
    }

    /// `min_k F(x_k)` over all rows.
    pub fn best_objective(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.composite_value)
            .fold(f64::INFINITY, f64::min)
    }

    /// First row whose `‖G_k‖` is at most `tol`.
    pub fn first_below(&self, tol: f64) -> Option<usize> {
        self.records.iter().position(|r| r.gradmap_norm <= tol)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Trace,
    /// Argmin of `F` over `x_1, …, x_K`, or `x_1` when no iteration ran.
    pub best: Point,
    pub best_value: f64,
    /// `x_{K+1}`, the last point produced.
    pub last: Point,
    pub report: Option<MonitorReport>,
}

/// Solver state between iterations: `(x_{k-1}, x_k)` and what is known about them.
#[derive(Debug, Clone)]
pub struct RunState {
    /// Index of the next iteration.
    pub k: usize,
    pub x_prev: Point,
    pub x_cur: Point,
    pub grad_prev: Point,
    pub f_prev: f64,
    pub lambda_prev: f64,
    pub lambda_prevprev: f64,
    /// `ρ_{k-1}`.
    pub rho_next: f64,
    started: Instant,
}

impl RunState {
    pub fn elapsed(&self) -> f64 {
        self.started.elapsed().as_secs_f64()
    }
}

/// `x_1 = prox_{λ₀h}(x_0 - λ₀∇f(x_0))`.
///
/// The fixed-step engine uses its own step here and the line-search engine
/// backtracks, so `λ₀` only matters for the adaptive engines.
pub fn init_first_step(
    oracle: &mut Oracle<'_>,
    x0: &Point,
    config: &SolverConfig,
) -> Result<(RunState, IterationRecord)> {
    config.validate()?;
    let started = Instant::now();
    let (f0, g0) = oracle.value_and_gradient(x0)?;
    let lambda0 = match config.engine {
        Engine::FixedStep(s) => s,
        Engine::GdLs => {
            armijo_search(|y| oracle_value(oracle, y), x0, f0, &g0)
                .map_err(|e| match e {
                    Error::Usage(_) => Error::Usage("zero gradient at the starting point".into()),
                    e => e,
                })?
                .0
        }
        _ => config.lambda0,
    };
    let x1 = oracle.prox(&(x0 - &(&g0 * lambda0)), lambda0)?;
    let problem = oracle.problem();
    let record = IterationRecord {
        k: 0,
        f_value: f0,
        composite_value: f0 + problem.nonsmooth.value(x0),
        gradmap_norm: dist(&x1, x0) / lambda0,
        lambda: lambda0,
        upper_curv: f64::NAN,
        lower_curv: f64::NAN,
        rho_used: 0.0,
        bb_term: None,
        residual: None,
        elapsed_s: started.elapsed().as_secs_f64(),
        counters: oracle.counters(),
    };
    let state = RunState {
        k: 1,
        x_prev: x0.clone(),
        x_cur: x1,
        grad_prev: g0,
        f_prev: f0,
        lambda_prev: lambda0,
        lambda_prevprev: 0.0,
        rho_next: if config.engine.uses_rho() {
            config.rho.value(0, None)?
        } else {
            0.0
        },
        started,
    };
    Ok((state, record))
}

fn oracle_value(oracle: &mut Oracle<'_>, y: &Point) -> Result<f64> {
    oracle.value(y)
}

/// One iteration. Returns `None` when the run has stagnated (degenerate step,
/// or a vanishing gradient under line search); the state is then unchanged.
pub fn iterate(
    oracle: &mut Oracle<'_>,
    state: &mut RunState,
    config: &SolverConfig,
) -> Result<Option<(Point, IterationRecord)>> {
    let (f_cur, g_cur) = oracle.value_and_gradient(&state.x_cur)?;
    let window = StepState {
        k: state.k,
        x_prev: state.x_prev.clone(),
        x_cur: state.x_cur.clone(),
        grad_prev: state.grad_prev.clone(),
        grad_cur: g_cur.clone(),
        f_prev: state.f_prev,
        f_cur,
        lambda_prev: state.lambda_prev,
        lambda_prevprev: state.lambda_prevprev,
    };
    let curv = match estimate_curvature(&window) {
        Ok(c) => c,
        Err(Error::DegenerateStep { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let rho = state.rho_next;
    let mut bb = None;
    let lambda = match config.engine {
        Engine::AdaPgnc => adapgnc_step(state.lambda_prev, rho, curv)?,
        Engine::AdaPgncRelaxed => relaxed_step(state.lambda_prev, rho, curv)?,
        Engine::AdaPgncBb => {
            let dx = &window.x_cur - &window.x_prev;
            let dg = &g_cur - &window.grad_prev;
            let term = bb_term(&dx, &dg)?;
            bb = Some(term);
            ((1.0 + rho).sqrt() * state.lambda_prev).min(term)
        }
        Engine::AdGd => adgd_step(state.lambda_prev, state.lambda_prevprev, curv)?,
        Engine::FixedStep(s) => s,
        Engine::GdLs => {
            if norm(&g_cur) == 0.0 {
                return Ok(None);
            }
            armijo_search(|y| oracle_value(oracle, y), &state.x_cur, f_cur, &g_cur)?.0
        }
    };
    let x_next = oracle.prox(&(&state.x_cur - &(&g_cur * lambda)), lambda)?;

    // ∇f(x_k) + h'(x_k), with h'(x_k) certified by the step that produced x_k.
    let residual = {
        let back = (&state.x_prev - &state.x_cur) / state.lambda_prev;
        norm(&(back - &state.grad_prev + &g_cur))
    };
    let problem = oracle.problem();
    let record = IterationRecord {
        k: state.k,
        f_value: f_cur,
        composite_value: f_cur + problem.nonsmooth.value(&state.x_cur),
        gradmap_norm: dist(&x_next, &state.x_cur) / lambda,
        lambda,
        upper_curv: curv.upper,
        lower_curv: curv.lower,
        rho_used: if config.engine.uses_rho() { rho } else { 0.0 },
        bb_term: bb,
        residual: Some(residual),
        elapsed_s: state.elapsed(),
        counters: oracle.counters(),
    };

    if config.engine.uses_rho() {
        state.rho_next = config
            .rho
            .value(state.k, Some(lambda / state.lambda_prev))?;
    }
    state.k += 1;
    state.lambda_prevprev = state.lambda_prev;
    state.lambda_prev = lambda;
    state.f_prev = f_cur;
    state.grad_prev = g_cur;
    state.x_prev = std::mem::replace(&mut state.x_cur, x_next.clone());
    Ok(Some((x_next, record)))
}

/// Runs until the first of: `‖G_k‖ ≤ tol`, `max_iters` iterations, the time
/// budget (checked once per iteration), or stagnation.
pub fn run(problem: &CompositeProblem, x0: &Point, config: &SolverConfig) -> Result<RunOutput> {
    config.validate()?;
    if config.monitor && !problem.globally_smooth {
        return usage(format!(
            "problem '{}' is not attested globally smooth; the monitor does not apply",
            problem.name
        ));
    }
    problem.check_point(x0)?;
    let mut oracle = Oracle::new(problem);
    let (mut state, rec0) = init_first_step(&mut oracle, x0, config)?;
    let mut iterates = config
        .keep_iterates
        .then(|| vec![x0.clone(), state.x_cur.clone()]);
    let mut records = vec![rec0];
    let mut best: Option<(f64, Point)> = None;

    let mut termination = if records[0].gradmap_norm <= config.gradmap_tol {
        Termination::Tol
    } else {
        Termination::MaxIters
    };
    if termination != Termination::Tol {
        while state.k <= config.max_iters {
            if state.elapsed() >= config.max_seconds {
                termination = Termination::MaxSeconds;
                break;
            }
            let x_k = state.x_cur.clone();
            let Some((x_next, record)) = iterate(&mut oracle, &mut state, config)? else {
                termination = Termination::Stagnation;
                break;
            };
            if best.as_ref().is_none_or(|(v, _)| record.composite_value < *v) {
                best = Some((record.composite_value, x_k));
            }
            if let Some(its) = iterates.as_mut() {
                its.push(x_next);
            }
            let done = record.gradmap_norm <= config.gradmap_tol;
            records.push(record);
            if done {
                termination = Termination::Tol;
                break;
            }
        }
    }

    let last = state.x_cur.clone();
    let (best_value, best) = match best {
        Some(b) => b,
        None => {
            // No iteration ran, so the state still holds x_1, never evaluated
            // inside the loop; use the uncounted objective.
            let x1 = state.x_cur.clone();
            (problem.objective(&x1)?, x1)
        }
    };
    let trace = Trace {
        engine: config.engine,
        rho: config.rho.clone(),
        lambda0: records[0].lambda,
        records,
        termination,
        iterates,
    };
    let report = if config.monitor {
        Some(monitor_check(&trace, &problem.info(), config.rho.total())?)
    } else {
        None
    };
    Ok(RunOutput {
        trace,
        best,
        best_value,
        last,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::SmoothClosure;
    use crate::prox::ProxKind;
    use ndarray::array;

    fn half_square(dim: usize) -> SmoothClosure {
        SmoothClosure::new(dim, |x| 0.5 * crate::linalg::norm_sq(x), |x| x.clone())
            .with_lipschitz(1.0)
    }

    fn problem(h: ProxKind) -> CompositeProblem {
        CompositeProblem::new("half-square", half_square(1), h).unwrap()
    }

    #[test]
    fn first_step_examples() {
        let cfg = SolverConfig::new(Engine::AdaPgnc, RhoSequence::zero());
        let p = problem(ProxKind::Zero);
        let (s, r) = init_first_step(&mut Oracle::new(&p), &array![1.0], &cfg).unwrap();
        assert_eq!(s.x_cur, array![0.0]);
        assert_eq!(r.gradmap_norm, 1.0);

        let p = CompositeProblem::new("l1", SmoothClosure::zero(1), ProxKind::L1(1.0)).unwrap();
        let (s, _) = init_first_step(&mut Oracle::new(&p), &array![3.0], &cfg).unwrap();
        assert_eq!(s.x_cur, array![2.0]);

        let p = problem(ProxKind::NonnegIndicator);
        let cfg = cfg.with_lambda0(0.5);
        let (s, _) = init_first_step(&mut Oracle::new(&p), &array![-1.0], &cfg).unwrap();
        assert_eq!(s.x_cur, array![0.0]);
    }

    fn mid_run_state(p: &CompositeProblem) -> (Oracle<'_>, RunState) {
        let oracle = Oracle::new(p);
        let state = RunState {
            k: 1,
            x_prev: array![2.0],
            x_cur: array![1.0],
            grad_prev: array![2.0],
            f_prev: 2.0,
            lambda_prev: 1.0,
            lambda_prevprev: 0.0,
            rho_next: 0.0,
            started: Instant::now(),
        };
        (oracle, state)
    }

    #[test]
    fn one_iteration_on_the_quadratic() {
        let p = problem(ProxKind::Zero);
        let cfg = SolverConfig::new(Engine::AdaPgnc, RhoSequence::zero());
        let (mut oracle, mut state) = mid_run_state(&p);
        let (x_next, rec) = iterate(&mut oracle, &mut state, &cfg).unwrap().unwrap();
        assert_eq!((rec.upper_curv, rec.lower_curv, rec.lambda), (1.0, -1.0, 1.0));
        assert_eq!(x_next, array![0.0]);

        let cfg = SolverConfig::fixed(0.5);
        let (mut oracle, mut state) = mid_run_state(&p);
        let (x_next, _) = iterate(&mut oracle, &mut state, &cfg).unwrap().unwrap();
        assert_eq!(x_next, array![0.5]);
    }

    #[test]
    fn quadratic_converges_quickly() {
        let p = problem(ProxKind::Zero);
        let cfg = SolverConfig::new(Engine::AdaPgnc, RhoSequence::rho2()).with_tol(1e-12);
        let out = run(&p, &array![1.0], &cfg).unwrap();
        assert_eq!(out.trace.termination, Termination::Tol);
        assert!(out.trace.iterations() <= 3);
        assert!(out.trace.records.last().unwrap().gradmap_norm <= 1e-12);
    }

    #[test]
    fn zero_iterations_returns_first_step() {
        let p = problem(ProxKind::Zero);
        let cfg = SolverConfig::adapgnc_2().with_lambda0(0.5).with_max_iters(0);
        let out = run(&p, &array![1.0], &cfg).unwrap();
        assert_eq!(out.trace.records.len(), 1);
        assert_eq!(out.best, array![0.5]);
        assert_eq!(out.best_value, 0.125);
        assert_eq!(out.trace.termination, Termination::MaxIters);
    }

    #[test]
    fn stagnation_is_not_an_error() {
        // A step of one ulp at x = 1000 is below the degeneracy threshold.
        let p = problem(ProxKind::Zero);
        let out = run(&p, &array![1000.0], &SolverConfig::fixed(1.2e-16)).unwrap();
        assert!(out.trace.records[0].gradmap_norm > 0.0);
        assert_eq!(out.trace.termination, Termination::Stagnation);
    }

    #[test]
    fn monitor_rejects_uncovered_engines() {
        let p = problem(ProxKind::Zero);
        let cfg = SolverConfig::fixed(0.5).with_monitor(true);
        assert!(matches!(run(&p, &array![1.0], &cfg), Err(Error::Usage(_))));
    }

    #[test]
    fn oracle_economy() {
        let p = problem(ProxKind::L1(0.1));
        let cfg = SolverConfig::adapgnc_1().with_max_iters(5).with_lambda0(0.3);
        let out = run(&p, &array![4.0], &cfg).unwrap();
        let last = out.trace.records.last().unwrap();
        let iters = out.trace.iterations() as u64;
        assert_eq!(last.counters.n_gradient, iters + 1);
        assert_eq!(last.counters.n_value, iters + 1);
        assert_eq!(last.counters.n_prox, iters + 1);
    }
}
