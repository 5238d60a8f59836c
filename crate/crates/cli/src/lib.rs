//! Benchmark harness for the `adaprox` solvers: LIBSVM ingestion, experiment
//! recipes, solver × seed grids, trace files and the `adaprox` command line.

pub mod cli;
pub mod config;
pub mod datagen;
pub mod error;
pub mod experiment;
pub mod libsvm;
pub mod trace_io;

pub use cli::cli_main;
pub use config::{ExperimentConfig, ProblemSpec, RhoChoice, SolverKind, SolverSpec, TraceFormat};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, ComparisonRow, ExperimentReport, SolverSummary};
pub use libsvm::{parse_libsvm, write_libsvm};
pub use trace_io::{read_trace, write_trace, TraceFile, TraceMeta, CSV_HEADER};
