//! Experiment recipes. A recipe is a TOML file with one `[problem]` table, a
//! list of seeds and one `[[solver]]` table per solver:
//!
//! ```toml
//! seeds = [0, 1, 2]
//! output_dir = "runs/nmf"
//! format = "csv"        # or "json"
//! jobs = 4              # cells run concurrently
//! record_time = true    # false writes elapsed_s = 0 for byte-stable traces
//!
//! [problem]
//! kind = "nmf"
//! n = 200
//! r = 5
//! m = 300
//!
//! [[solver]]
//! solver = "adapgnc"
//! rho = "rho1"
//! lambda0 = 1e-3
//! tol = 1e-6
//! max_iters = 50000
//! ```

use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use adaprox::{
    default_gamma, lasso_instance, logistic_problem, logistic_synthetic, mc_instance,
    nmf_instance, quadratic_problem, Engine, Point, ProblemInstance, RhoSequence, SeededRng,
    SolverConfig, SparseDesign,
};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{config, io_err, HarnessError, Result};
use crate::libsvm::parse_libsvm;

/// Problem family plus its size parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProblemSpec {
    /// `½ xᵀ diag(d) x` with `d` log-spaced from 1 to `cond`, started at the
    /// all-ones point. Does not depend on the seed.
    Quadratic { dim: usize, cond: f64 },
    /// Synthetic `m × n` design, or a LIBSVM file when `dataset` is set (then
    /// `m`, `n` are ignored and the seed only picks the start point).
    Logistic {
        m: usize,
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dataset: Option<PathBuf>,
        /// Defaults to `L₀/m`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<f64>,
    },
    Lasso { m: usize, n: usize },
    Nmf { n: usize, r: usize, m: usize },
    Mc {
        p: usize,
        q: usize,
        r: usize,
        n_obs: usize,
        noise: f64,
    },
}

impl ProblemSpec {
    pub const KINDS: [&'static str; 5] = ["quadratic", "logistic", "lasso", "nmf", "mc"];

    /// Desk-scale defaults for a family name.
    pub fn default_for(kind: &str) -> Result<Self> {
        Ok(match kind {
            "quadratic" => ProblemSpec::Quadratic { dim: 10, cond: 10.0 },
            "logistic" => ProblemSpec::Logistic {
                m: 200,
                n: 20,
                dataset: None,
                gamma: None,
            },
            "lasso" => ProblemSpec::Lasso { m: 100, n: 50 },
            "nmf" => ProblemSpec::Nmf { n: 200, r: 5, m: 300 },
            "mc" => ProblemSpec::Mc {
                p: 100,
                q: 80,
                r: 5,
                n_obs: 2000,
                noise: 0.1,
            },
            other => return config(format!("unknown problem '{other}'; expected one of {:?}", Self::KINDS)),
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ProblemSpec::Quadratic { .. } => "quadratic",
            ProblemSpec::Logistic { .. } => "logistic",
            ProblemSpec::Lasso { .. } => "lasso",
            ProblemSpec::Nmf { .. } => "nmf",
            ProblemSpec::Mc { .. } => "mc",
        }
    }

    /// Whether different seeds give different data (and hence different `F*`).
    pub fn data_depends_on_seed(&self) -> bool {
        !matches!(
            self,
            ProblemSpec::Quadratic { .. } | ProblemSpec::Logistic { dataset: Some(_), .. }
        )
    }

    /// Parses the dataset file, if one is named.
    pub fn load_dataset(&self) -> Result<Option<SparseDesign>> {
        match self {
            ProblemSpec::Logistic {
                dataset: Some(path), ..
            } => {
                let file = File::open(path).map_err(io_err(path))?;
                let design = parse_libsvm(BufReader::new(file)).map_err(|e| match e {
                    HarnessError::Parse { line, msg } => HarnessError::Config(format!(
                        "{}: line {line}: {msg}",
                        path.display()
                    )),
                    e => e,
                })?;
                Ok(Some(design))
            }
            _ => Ok(None),
        }
    }

    /// Builds the instance for one seed. `loaded` is the result of
    /// [`load_dataset`](Self::load_dataset).
    pub fn instance(&self, seed: u64, loaded: Option<&SparseDesign>) -> Result<ProblemInstance> {
        let inst = match self {
            &ProblemSpec::Quadratic { dim, cond } => {
                if dim == 0 || !(cond.is_finite() && cond >= 1.0) {
                    return config(format!("quadratic needs dim >= 1 and cond >= 1, got {dim}, {cond}"));
                }
                let d = Point::from_shape_fn(dim, |i| {
                    let t = if dim > 1 { i as f64 / (dim - 1) as f64 } else { 0.0 };
                    cond.powf(t)
                });
                ProblemInstance {
                    problem: quadratic_problem(Array2::from_diag(&d))?.with_fstar(0.0),
                    x0: Point::ones(dim),
                }
            }
            ProblemSpec::Logistic { m, n, dataset, gamma } => {
                let design = match (dataset, loaded) {
                    (None, _) => logistic_synthetic(*m, *n, seed),
                    (Some(_), Some(d)) => d.clone(),
                    (Some(path), None) => {
                        return config(format!("dataset {} was not loaded", path.display()))
                    }
                };
                let gamma = gamma.unwrap_or_else(|| default_gamma(&design));
                let n = design.n_cols();
                // Same start-point stream as the synthetic instances.
                let x0 = Point::from(SeededRng::new(seed.wrapping_add(0x5eed)).normals(n));
                ProblemInstance {
                    problem: logistic_problem(design, gamma)?,
                    x0,
                }
            }
            &ProblemSpec::Lasso { m, n } => lasso_instance(m, n, seed)?,
            &ProblemSpec::Nmf { n, r, m } => nmf_instance(n, r, m, seed)?,
            &ProblemSpec::Mc { p, q, r, n_obs, noise } => mc_instance(p, q, r, n_obs, noise, seed)?,
        };
        Ok(inst)
    }
}

/// Step-size engine names as used on the command line and in recipes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Adapgnc,
    Relaxed,
    Bb,
    Adgd,
    /// Constant step, `1/L` unless `step` is given.
    Fixed,
    Gdls,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RhoChoice {
    Rho1,
    Rho2,
    Zero,
}

impl RhoChoice {
    pub fn sequence(self) -> RhoSequence {
        match self {
            RhoChoice::Rho1 => RhoSequence::rho1(),
            RhoChoice::Rho2 => RhoSequence::rho2(),
            RhoChoice::Zero => RhoSequence::zero(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TraceFormat {
    #[default]
    Csv,
    Json,
}

impl TraceFormat {
    pub fn extension(self) -> &'static str {
        match self {
            TraceFormat::Csv => "csv",
            TraceFormat::Json => "json",
        }
    }

    /// Guesses from a file extension; anything but `.json` is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => TraceFormat::Json,
            _ => TraceFormat::Csv,
        }
    }
}

impl fmt::Display for TraceFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

fn default_rho() -> RhoChoice {
    RhoChoice::Rho2
}

fn one() -> f64 {
    1.0
}

fn default_max_iters() -> usize {
    1000
}

/// One solver column of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    /// Display name; defaults to e.g. `AdaPGNC-2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub solver: SolverKind,
    #[serde(default = "default_rho")]
    pub rho: RhoChoice,
    #[serde(default = "one")]
    pub lambda0: f64,
    /// Fixed-step size; `1/L` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    /// Stop once `‖G_k‖ ≤ tol`.
    #[serde(default)]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_seconds: Option<f64>,
    /// Replay each trace through the theory monitor.
    #[serde(default)]
    pub monitor: bool,
}

impl SolverSpec {
    pub fn new(solver: SolverKind, rho: RhoChoice) -> Self {
        Self {
            name: None,
            solver,
            rho,
            lambda0: 1.0,
            step: None,
            tol: 0.0,
            max_iters: default_max_iters(),
            max_seconds: None,
            monitor: false,
        }
    }

    pub fn display_name(&self) -> String {
        if let Some(n) = &self.name {
            return n.clone();
        }
        let suffix = match self.rho {
            RhoChoice::Rho1 => "-1",
            RhoChoice::Rho2 => "-2",
            RhoChoice::Zero => "-0",
        };
        match self.solver {
            SolverKind::Adapgnc => format!("AdaPGNC{suffix}"),
            SolverKind::Relaxed => format!("AdaPGNC-relaxed{suffix}"),
            SolverKind::Bb => format!("AdaPGNC-BB{suffix}"),
            SolverKind::Adgd => "AdGD".into(),
            SolverKind::Fixed => "Fixed".into(),
            SolverKind::Gdls => "GD-LS".into(),
        }
    }

    pub fn engine(&self, known_lipschitz: Option<f64>) -> Result<Engine> {
        Ok(match self.solver {
            SolverKind::Adapgnc => Engine::AdaPgnc,
            SolverKind::Relaxed => Engine::AdaPgncRelaxed,
            SolverKind::Bb => Engine::AdaPgncBb,
            SolverKind::Adgd => Engine::AdGd,
            SolverKind::Gdls => Engine::GdLs,
            SolverKind::Fixed => match (self.step, known_lipschitz) {
                (Some(s), _) => Engine::FixedStep(s),
                (None, Some(l)) if l > 0.0 => Engine::FixedStep(1.0 / l),
                _ => return config("fixed step needs `step` when the problem has no known L"),
            },
        })
    }

    /// The core solver configuration for a problem with the given `L`, if known.
    pub fn solver_config(&self, known_lipschitz: Option<f64>) -> Result<SolverConfig> {
        let engine = self.engine(known_lipschitz)?;
        let rho = if engine.uses_rho() {
            self.rho.sequence()
        } else {
            RhoSequence::zero()
        };
        let cfg = SolverConfig::new(engine, rho)
            .with_name(self.display_name())
            .with_lambda0(self.lambda0)
            .with_tol(self.tol)
            .with_max_iters(self.max_iters)
            .with_max_seconds(self.max_seconds.unwrap_or(f64::INFINITY))
            .with_monitor(self.monitor);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn default_jobs() -> usize {
    1
}

fn yes() -> bool {
    true
}

/// A solver × seed grid on one problem family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub format: TraceFormat,
    /// Upper bound on concurrently running cells.
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    /// When false, `elapsed_s` is written as 0 so reruns give identical files.
    #[serde(default = "yes")]
    pub record_time: bool,
    pub problem: ProblemSpec,
    #[serde(rename = "solver")]
    pub solvers: Vec<SolverSpec>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.solvers.is_empty() {
            return config("the recipe needs at least one [[solver]]");
        }
        if self.seeds.is_empty() {
            return config("the recipe needs at least one seed");
        }
        if self.jobs == 0 {
            return config("jobs must be at least 1");
        }
        let mut names: Vec<String> = self.solvers.iter().map(|s| s.display_name()).collect();
        names.sort();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return config(format!("solver name '{}' is used twice; set `name`", w[0]));
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        if seeds.windows(2).any(|w| w[0] == w[1]) {
            return config("seeds must be distinct");
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let cfg: Self = text.parse()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }
}

impl FromStr for ExperimentConfig {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RECIPE: &str = r#"
seeds = [0, 1]
output_dir = "out"

[problem]
kind = "lasso"
m = 20
n = 10

[[solver]]
solver = "adapgnc"
rho = "rho1"

[[solver]]
solver = "fixed"
tol = 1e-8
"#;

    #[test]
    fn defaults_fill_in() {
        let cfg: ExperimentConfig = RECIPE.parse().unwrap();
        assert_eq!(cfg.format, TraceFormat::Csv);
        assert_eq!(cfg.jobs, 1);
        assert!(cfg.record_time);
        assert_eq!(cfg.solvers[1].rho, RhoChoice::Rho2);
        assert_eq!(cfg.solvers[1].lambda0, 1.0);
        assert_eq!(cfg.solvers[0].display_name(), "AdaPGNC-1");
        assert_eq!(cfg.solvers[1].display_name(), "Fixed");
    }

    #[test]
    fn round_trip_is_idempotent() {
        let cfg: ExperimentConfig = RECIPE.parse().unwrap();
        let once = cfg.to_toml().unwrap();
        let back: ExperimentConfig = once.parse().unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_toml().unwrap(), once);
    }

    #[test]
    fn rejects_bad_recipes() {
        assert!("seeds = []\noutput_dir = \"o\"\n[problem]\nkind = \"lasso\"\nm = 2\nn = 2\n[[solver]]\nsolver = \"bb\"\n"
            .parse::<ExperimentConfig>()
            .is_err());
        let dup = RECIPE.replace("rho = \"rho1\"", "rho = \"rho2\"").replace("solver = \"fixed\"", "solver = \"adapgnc\"");
        assert!(dup.parse::<ExperimentConfig>().is_err());
        let typo = RECIPE.replace("tol = 1e-8", "tolerance = 1e-8");
        assert!(typo.parse::<ExperimentConfig>().is_err());
    }

    #[test]
    fn fixed_step_defaults_to_inverse_lipschitz() {
        let spec = SolverSpec::new(SolverKind::Fixed, RhoChoice::Rho2);
        assert_eq!(spec.engine(Some(4.0)).unwrap(), Engine::FixedStep(0.25));
        assert!(spec.engine(None).is_err());
    }

    #[test]
    fn quadratic_toy_is_seed_independent() {
        let spec = ProblemSpec::default_for("quadratic").unwrap();
        assert!(!spec.data_depends_on_seed());
        let a = spec.instance(0, None).unwrap();
        let b = spec.instance(7, None).unwrap();
        assert_eq!(a.x0, b.x0);
        assert_eq!(a.problem.known_fstar, Some(0.0));
        assert!((a.problem.known_lipschitz().unwrap() - 10.0).abs() < 1e-9);
    }
}
