//! `adaprox solve | bench | check | gen`.
//!
//! Exit codes: 0 success, 1 solver or I/O error, 2 usage error, 3 monitor
//! violation.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use adaprox::{monitor_check, run, MonitorReport, Termination};
use clap::{Args, Parser, Subcommand};

use crate::config::{ExperimentConfig, ProblemSpec, RhoChoice, SolverKind, SolverSpec, TraceFormat};
use crate::datagen::write_dataset;
use crate::error::{config, io_err, HarnessError, Result};
use crate::experiment::run_experiment;
use crate::trace_io::{read_trace, write_trace, TraceMeta};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SOLVER: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_MONITOR: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "adaprox", version, about = "Adaptive proximal-gradient solvers and benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one solver on one problem.
    Solve(SolveArgs),
    /// Run a solver × seed grid from a recipe file.
    Bench(BenchArgs),
    /// Replay a trace file through the theory monitor.
    Check(CheckArgs),
    /// Write a synthetic dataset to a file.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
struct ProblemArgs {
    /// Problem family.
    #[arg(long, value_parser = ProblemSpec::KINDS)]
    problem: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// LIBSVM file for the logistic problem.
    #[arg(long)]
    data: Option<PathBuf>,
}

impl ProblemArgs {
    fn spec(&self) -> Result<ProblemSpec> {
        let Some(kind) = &self.problem else {
            return config("--problem is required");
        };
        let mut spec = ProblemSpec::default_for(kind)?;
        match (&mut spec, &self.data) {
            (ProblemSpec::Logistic { dataset, .. }, Some(path)) => *dataset = Some(path.clone()),
            (_, Some(_)) => return config("--data only applies to --problem logistic"),
            _ => {}
        }
        Ok(spec)
    }
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value_t = SolverKind::Adapgnc)]
    solver: SolverKind,
    #[arg(long, value_enum, default_value_t = RhoChoice::Rho2)]
    rho: RhoChoice,
    #[arg(long, default_value_t = 1.0)]
    lambda0: f64,
    /// Step of the fixed-step solver; 1/L by default.
    #[arg(long)]
    step: Option<f64>,
    /// Stop once the gradient-mapping norm is at most this.
    #[arg(long, default_value_t = 0.0)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    #[arg(long)]
    max_seconds: Option<f64>,
}

impl SolverArgs {
    fn spec(&self) -> SolverSpec {
        SolverSpec {
            lambda0: self.lambda0,
            step: self.step,
            tol: self.tol,
            max_iters: self.max_iters,
            max_seconds: self.max_seconds,
            ..SolverSpec::new(self.solver, self.rho)
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Write the trace here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trace format; guessed from the --out extension when absent.
    #[arg(long, value_enum)]
    format: Option<TraceFormat>,
    /// Check the finished trace with the theory monitor.
    #[arg(long)]
    monitor: bool,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Recipe file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the recipe's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<TraceFormat>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Trace file written by `solve` or `bench`.
    trace: PathBuf,
    #[arg(long, value_enum)]
    format: Option<TraceFormat>,
    /// For CSV traces, which carry no metadata: the problem that was solved.
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    out: PathBuf,
}

fn exit_code(e: &HarnessError) -> i32 {
    match e {
        HarnessError::Solver(adaprox::Error::Usage(_)) => EXIT_USAGE,
        HarnessError::Solver(_) | HarnessError::Io { .. } => EXIT_SOLVER,
        HarnessError::Parse { .. } | HarnessError::Config(_) | HarnessError::Trace { .. } => EXIT_USAGE,
    }
}

fn print_report(report: &MonitorReport, out: &mut dyn Write) -> std::io::Result<()> {
    for c in &report.checks {
        let status = match (&c.skipped, c.passed()) {
            (Some(why), _) => format!("skipped ({why})"),
            (None, true) => format!("ok over {} rows", c.evaluated),
            (None, false) => format!(
                "FAILED at {} of {} rows, first at k = {}",
                c.violations.len(),
                c.evaluated,
                c.violations[0].k
            ),
        };
        writeln!(out, "  {:<30} {status}", c.kind.label())?;
    }
    Ok(())
}

fn solve(args: &SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let spec = args.problem.spec()?;
    let dataset = spec.load_dataset()?;
    let inst = spec.instance(args.problem.seed, dataset.as_ref())?;
    let mut solver = args.solver.spec();
    solver.monitor = args.monitor;
    let cfg = solver.solver_config(inst.problem.known_lipschitz())?;
    let result = run(&inst.problem, &inst.x0, &cfg)?;
    let trace = &result.trace;
    let w = |e| HarnessError::Io {
        path: "<stdout>".into(),
        source: e,
    };
    writeln!(out, "problem     {} (dimension {})", spec.kind(), inst.problem.dim()).map_err(w)?;
    writeln!(out, "solver      {}", cfg.name).map_err(w)?;
    writeln!(out, "stopped     {} after {} iterations", trace.termination.as_str(), trace.iterations()).map_err(w)?;
    writeln!(out, "GradRes     {:.6e}", trace.best_gradmap()).map_err(w)?;
    writeln!(out, "best F      {:.17e}", result.best_value).map_err(w)?;
    if let Some(path) = &args.out {
        let format = args.format.unwrap_or_else(|| TraceFormat::from_path(path));
        let meta = TraceMeta {
            solver: cfg.name.clone(),
            seed: args.problem.seed,
            problem: spec.kind().into(),
            termination: trace.termination.as_str().into(),
            fstar: inst.problem.known_fstar,
            solver_config: Some(solver.clone()),
            problem_config: Some(spec.clone()),
        };
        write_trace(trace, &meta, format, path)?;
        writeln!(out, "trace       {}", path.display()).map_err(w)?;
    }
    match &result.report {
        Some(report) => {
            writeln!(out, "monitor").map_err(w)?;
            print_report(report, out).map_err(w)?;
            Ok(if report.passed() { EXIT_OK } else { EXIT_MONITOR })
        }
        None => Ok(EXIT_OK),
    }
}

fn bench(args: &BenchArgs, out: &mut dyn Write) -> Result<i32> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(dir) = &args.out {
        cfg.output_dir = dir.clone();
    }
    if let Some(f) = args.format {
        cfg.format = f;
    }
    let report = run_experiment(&cfg)?;
    let w = |e| HarnessError::Io {
        path: "<stdout>".into(),
        source: e,
    };
    write!(out, "{report}").map_err(w)?;
    writeln!(out, "summary written to {}", cfg.output_dir.join("summary.json").display()).map_err(w)?;
    Ok(if report.any_failed() {
        EXIT_SOLVER
    } else if report.any_monitor_violation() {
        EXIT_MONITOR
    } else {
        EXIT_OK
    })
}

fn check(args: &CheckArgs, out: &mut dyn Write) -> Result<i32> {
    let format = args.format.unwrap_or_else(|| TraceFormat::from_path(&args.trace));
    let file = read_trace(&args.trace, format)?;
    let (problem, solver, seed, fstar, termination) = match &file.meta {
        Some(TraceMeta {
            problem_config: Some(p),
            solver_config: Some(s),
            seed,
            fstar,
            termination,
            ..
        }) => (p.clone(), s.clone(), *seed, *fstar, Termination::parse(termination)),
        _ => (args.problem.spec()?, args.solver.spec(), args.problem.seed, None, None),
    };
    let dataset = problem.load_dataset()?;
    let inst = problem.instance(seed, dataset.as_ref())?;
    let mut info = inst.problem.info();
    info.known_fstar = fstar.or(info.known_fstar);
    let cfg = solver.solver_config(info.known_lipschitz)?;
    let rho_total = cfg.rho.total();
    let trace = file.into_trace(cfg.engine, cfg.rho, termination.unwrap_or(Termination::MaxIters));
    let report = monitor_check(&trace, &info, rho_total)?;
    let w = |e| HarnessError::Io {
        path: "<stdout>".into(),
        source: e,
    };
    writeln!(out, "{}: {} rows, {} on {}", args.trace.display(), trace.records.len(), cfg.name, problem.kind())
        .map_err(w)?;
    print_report(&report, out).map_err(w)?;
    if report.passed() {
        writeln!(out, "all checks passed").map_err(w)?;
        Ok(EXIT_OK)
    } else {
        writeln!(out, "monitor violations found").map_err(w)?;
        Ok(EXIT_MONITOR)
    }
}

fn gen(args: &GenArgs, out: &mut dyn Write) -> Result<i32> {
    let spec = args.problem.spec()?;
    let file = File::create(&args.out).map_err(io_err(&args.out))?;
    write_dataset(&spec, args.problem.seed, BufWriter::new(file))?;
    writeln!(out, "wrote {} data (seed {}) to {}", spec.kind(), args.problem.seed, args.out.display())
        .map_err(io_err(&args.out))?;
    Ok(EXIT_OK)
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn cli_main<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => solve(a, out),
        Command::Bench(a) => bench(a, out),
        Command::Check(a) => check(a, out),
        Command::Gen(a) => gen(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exit(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = cli_main(std::iter::once("adaprox").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn quadratic_toy_solves() {
        let (code, out, _) = exit(&[
            "solve", "--problem", "quadratic", "--solver", "adapgnc", "--rho", "zero", "--lambda0", "1",
            "--tol", "1e-10",
        ]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("stopped     tol"), "{out}");
    }

    #[test]
    fn unknown_flag_is_a_usage_error() {
        let (code, _, err) = exit(&["solve", "--problem", "quadratic", "--frobnicate"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("Usage"), "{err}");
        assert_eq!(exit(&["solve", "--problem", "simplex"]).0, EXIT_USAGE);
        assert_eq!(exit(&["solve", "--problem", "quadratic", "--rho", "rho3"]).0, EXIT_USAGE);
        assert_eq!(exit(&["solve"]).0, EXIT_USAGE);
        assert_eq!(exit(&["frob"]).0, EXIT_USAGE);
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        assert_eq!(exit(&["solve", "--problem", "quadratic", "--lambda0", "-1"]).0, EXIT_USAGE);
        assert_eq!(exit(&["solve", "--problem", "lasso", "--data", "x.svm"]).0, EXIT_USAGE);
    }

    #[test]
    fn nonconvex_detection_is_a_solver_error() {
        // The BB engine refuses curvature of the wrong sign on the factorization problems.
        let (code, _, err) = exit(&["solve", "--problem", "mc", "--solver", "bb", "--max-iters", "2000"]);
        assert_eq!(code, EXIT_SOLVER, "{err}");
    }

    #[test]
    fn help_exits_cleanly() {
        let (code, out, _) = exit(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("solve"));
    }
}
