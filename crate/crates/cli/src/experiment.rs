//! Solver × seed grids.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use adaprox::{run, SparseDesign};
use serde::Serialize;

use crate::config::{ExperimentConfig, ProblemSpec, SolverSpec};
use crate::error::{io_err, Result};
use crate::trace_io::{write_trace, TraceMeta};

/// Outcome of one successful cell, before `F̂*` is known.
#[derive(Debug, Clone)]
struct CellRun {
    iterations: usize,
    termination: String,
    grad_res: f64,
    best_objective: f64,
    seconds: f64,
    monitor: Option<bool>,
    trace: PathBuf,
}

/// One (solver, seed) line of the comparison table. Failed cells keep only
/// `error`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub solver: String,
    pub seed: u64,
    pub iterations: Option<usize>,
    pub termination: Option<String>,
    /// `min_k ‖G_k‖`.
    pub grad_res: Option<f64>,
    /// `min_k F(x_k) - F̂*`.
    pub opt_gap: Option<f64>,
    pub seconds: Option<f64>,
    /// Monitor verdict when the solver ran with the monitor on.
    pub monitor: Option<bool>,
    pub trace: Option<PathBuf>,
    pub error: Option<String>,
}

/// Means over the successful cells of one solver.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverSummary {
    pub solver: String,
    pub cells: usize,
    pub failed: usize,
    pub reached_tol: usize,
    pub mean_iterations: f64,
    pub mean_grad_res: f64,
    pub mean_opt_gap: f64,
    pub mean_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub problem: String,
    /// `F̂*` per distinct instance; keyed by seed, or by `"all"` when the data
    /// does not depend on the seed.
    pub fstar: BTreeMap<String, f64>,
    pub rows: Vec<ComparisonRow>,
    pub summaries: Vec<SolverSummary>,
}

impl ExperimentReport {
    pub fn any_failed(&self) -> bool {
        self.rows.iter().any(|r| r.error.is_some())
    }

    pub fn any_monitor_violation(&self) -> bool {
        self.rows.iter().any(|r| r.monitor == Some(false))
    }
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn prepare_output(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let probe = dir.join(".adaprox-write-probe");
    fs::write(&probe, b"").map_err(io_err(&probe))?;
    fs::remove_file(&probe).map_err(io_err(&probe))
}

fn run_cell(
    cfg: &ExperimentConfig,
    dataset: Option<&SparseDesign>,
    spec: &SolverSpec,
    seed: u64,
) -> Result<CellRun> {
    let inst = cfg.problem.instance(seed, dataset)?;
    let solver = spec.solver_config(inst.problem.known_lipschitz())?;
    let mut out = run(&inst.problem, &inst.x0, &solver)?;
    let trace = &mut out.trace;
    let seconds = trace.records.last().map_or(0.0, |r| r.elapsed_s);
    if !cfg.record_time {
        trace.records.iter_mut().for_each(|r| r.elapsed_s = 0.0);
    }
    let path = cfg.output_dir.join(format!(
        "{}_seed{seed}.{}",
        file_stem(&solver.name),
        cfg.format.extension()
    ));
    let meta = TraceMeta {
        solver: solver.name.clone(),
        seed,
        problem: cfg.problem.kind().into(),
        termination: trace.termination.as_str().into(),
        fstar: inst.problem.known_fstar,
        solver_config: Some(spec.clone()),
        problem_config: Some(cfg.problem.clone()),
    };
    write_trace(trace, &meta, cfg.format, &path)?;
    Ok(CellRun {
        iterations: trace.iterations(),
        termination: trace.termination.as_str().into(),
        grad_res: trace.best_gradmap(),
        best_objective: trace.best_objective(),
        seconds,
        monitor: out.report.as_ref().map(|r| r.passed()),
        trace: path,
    })
}

fn instance_key(problem: &ProblemSpec, seed: u64) -> String {
    if problem.data_depends_on_seed() {
        seed.to_string()
    } else {
        "all".into()
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Runs every (solver, seed) cell, writes one trace per cell plus
/// `summary.json`, and returns the comparison table.
///
/// Setup problems (invalid recipe, unwritable output directory, unreadable
/// dataset) fail before any cell runs; cell failures are recorded per row.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    prepare_output(&cfg.output_dir)?;
    let dataset = cfg.problem.load_dataset()?;

    let cells: Vec<(usize, u64)> = (0..cfg.solvers.len())
        .flat_map(|s| cfg.seeds.iter().map(move |&seed| (s, seed)))
        .collect();
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel();
    std::thread::scope(|scope| {
        for _ in 0..cfg.jobs.min(cells.len()) {
            let tx = tx.clone();
            let (next, cells, dataset) = (&next, &cells, dataset.as_ref());
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(s, seed)) = cells.get(i) else { break };
                let outcome = run_cell(cfg, dataset, &cfg.solvers[s], seed).map_err(|e| e.to_string());
                if tx.send((i, outcome)).is_err() {
                    break;
                }
            });
        }
    });
    drop(tx);
    let mut outcomes: Vec<Option<std::result::Result<CellRun, String>>> = vec![None; cells.len()];
    for (i, o) in rx {
        outcomes[i] = Some(o);
    }

    let mut fstar: BTreeMap<String, f64> = BTreeMap::new();
    for (&(_, seed), o) in cells.iter().zip(&outcomes) {
        if let Some(Ok(c)) = o {
            let e = fstar
                .entry(instance_key(&cfg.problem, seed))
                .or_insert(f64::INFINITY);
            *e = e.min(c.best_objective);
        }
    }

    let rows: Vec<ComparisonRow> = cells
        .iter()
        .zip(outcomes)
        .map(|(&(s, seed), o)| {
            let solver = cfg.solvers[s].display_name();
            match o.expect("every cell reports") {
                Ok(c) => ComparisonRow {
                    solver,
                    seed,
                    iterations: Some(c.iterations),
                    termination: Some(c.termination),
                    grad_res: Some(c.grad_res),
                    opt_gap: Some(c.best_objective - fstar[&instance_key(&cfg.problem, seed)]),
                    seconds: Some(c.seconds),
                    monitor: c.monitor,
                    trace: Some(c.trace),
                    error: None,
                },
                Err(e) => ComparisonRow {
                    solver,
                    seed,
                    iterations: None,
                    termination: None,
                    grad_res: None,
                    opt_gap: None,
                    seconds: None,
                    monitor: None,
                    trace: None,
                    error: Some(e),
                },
            }
        })
        .collect();

    let summaries = cfg
        .solvers
        .iter()
        .map(|spec| {
            let name = spec.display_name();
            let mine: Vec<&ComparisonRow> = rows.iter().filter(|r| r.solver == name).collect();
            let ok: Vec<&ComparisonRow> = mine.iter().copied().filter(|r| r.error.is_none()).collect();
            SolverSummary {
                cells: mine.len(),
                failed: mine.len() - ok.len(),
                reached_tol: ok.iter().filter(|r| r.termination.as_deref() == Some("tol")).count(),
                mean_iterations: mean(ok.iter().filter_map(|r| r.iterations.map(|i| i as f64))),
                mean_grad_res: mean(ok.iter().filter_map(|r| r.grad_res)),
                mean_opt_gap: mean(ok.iter().filter_map(|r| r.opt_gap)),
                mean_seconds: mean(ok.iter().filter_map(|r| r.seconds)),
                solver: name,
            }
        })
        .collect();

    let report = ExperimentReport {
        problem: cfg.problem.kind().into(),
        fstar,
        rows,
        summaries,
    };
    let summary_path = cfg.output_dir.join("summary.json");
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    fs::write(&summary_path, text + "\n").map_err(io_err(&summary_path))?;
    Ok(report)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.3e}"))
}

impl fmt::Display for ExperimentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<20} {:>6} {:>8} {:<12} {:>10} {:>10} {:>9} {:>8}",
            "solver", "seed", "iters", "stop", "GradRes", "OptGap", "seconds", "monitor"
        )?;
        for r in &self.rows {
            match &r.error {
                Some(e) => writeln!(f, "{:<20} {:>6} error: {e}", r.solver, r.seed)?,
                None => writeln!(
                    f,
                    "{:<20} {:>6} {:>8} {:<12} {:>10} {:>10} {:>9.3} {:>8}",
                    r.solver,
                    r.seed,
                    r.iterations.unwrap_or(0),
                    r.termination.as_deref().unwrap_or("-"),
                    opt(r.grad_res),
                    opt(r.opt_gap),
                    r.seconds.unwrap_or(f64::NAN),
                    match r.monitor {
                        Some(true) => "ok",
                        Some(false) => "FAILED",
                        None => "-",
                    },
                )?,
            }
        }
        writeln!(f)?;
        writeln!(
            f,
            "{:<20} {:>6} {:>10} {:>10} {:>10} {:>9}",
            "solver", "tol", "mean iters", "GradRes", "OptGap", "seconds"
        )?;
        for s in &self.summaries {
            writeln!(
                f,
                "{:<20} {:>6} {:>10.1} {:>10} {:>10} {:>9.3}",
                s.solver,
                format!("{}/{}", s.reached_tol, s.cells),
                s.mean_iterations,
                opt(Some(s.mean_grad_res)),
                opt(Some(s.mean_opt_gap)),
                s.mean_seconds,
            )?;
        }
        Ok(())
    }
}
