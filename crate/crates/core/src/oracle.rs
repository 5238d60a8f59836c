//! Oracle contracts for composite problems `F = f + h`, evaluation counting and
//! the finite-difference gradient used to audit analytic gradients.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::linalg::{all_finite, Point};
use crate::prox::ProxKind;

/// The smooth part `f` of a composite objective.
pub trait SmoothFn: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &Point) -> f64;

    fn gradient(&self, x: &Point) -> Point;

    /// Fused evaluation; override when value and gradient share work.
    fn value_and_gradient(&self, x: &Point) -> (f64, Point) {
        (self.value(x), self.gradient(x))
    }

    /// A global Lipschitz constant of the gradient, when one is known.
    fn lipschitz(&self) -> Option<f64> {
        None
    }
}

type ValueFn = dyn Fn(&Point) -> f64 + Send + Sync;
type GradFn = dyn Fn(&Point) -> Point + Send + Sync;

/// A [`SmoothFn`] assembled from closures, handy for toy problems and tests.
pub struct SmoothClosure {
    dim: usize,
    value: Box<ValueFn>,
    gradient: Box<GradFn>,
    lipschitz: Option<f64>,
}

impl SmoothClosure {
    pub fn new(
        dim: usize,
        value: impl Fn(&Point) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&Point) -> Point + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            value: Box::new(value),
            gradient: Box::new(gradient),
            lipschitz: None,
        }
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    /// `f ≡ 0`.
    pub fn zero(dim: usize) -> Self {
        Self::new(dim, |_| 0.0, move |x| Point::zeros(x.len())).with_lipschitz(0.0)
    }
}

impl SmoothFn for SmoothClosure {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &Point) -> f64 {
        (self.value)(x)
    }
    fn gradient(&self, x: &Point) -> Point {
        (self.gradient)(x)
    }
    fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }
}

/// Static facts about a problem that the theory monitor needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInfo {
    pub name: String,
    pub known_lipschitz: Option<f64>,
    pub known_fstar: Option<f64>,
    /// Caller attests that `f` has a globally Lipschitz gradient and `F` is
    /// bounded below, so the convergence inequalities apply.
    pub globally_smooth: bool,
}

/// `min F(x) = f(x) + h(x)` with `f` smooth and `h` given by its prox.
pub struct CompositeProblem {
    pub name: String,
    pub smooth: Box<dyn SmoothFn>,
    pub nonsmooth: ProxKind,
    pub known_fstar: Option<f64>,
    pub globally_smooth: bool,
}

impl fmt::Debug for CompositeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompositeProblem")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("nonsmooth", &self.nonsmooth)
            .field("known_lipschitz", &self.known_lipschitz())
            .field("known_fstar", &self.known_fstar)
            .finish()
    }
}

impl CompositeProblem {
    pub fn new(
        name: impl Into<String>,
        smooth: impl SmoothFn + 'static,
        nonsmooth: ProxKind,
    ) -> Result<Self> {
        let dim = smooth.dim();
        if dim == 0 {
            return usage("problem dimension must be at least 1");
        }
        nonsmooth.validate(dim)?;
        Ok(Self {
            name: name.into(),
            smooth: Box::new(smooth),
            nonsmooth,
            known_fstar: None,
            globally_smooth: true,
        })
    }

    pub fn with_fstar(mut self, fstar: f64) -> Self {
        self.known_fstar = Some(fstar);
        self
    }

    pub fn with_globally_smooth(mut self, attested: bool) -> Self {
        self.globally_smooth = attested;
        self
    }

    pub fn dim(&self) -> usize {
        self.smooth.dim()
    }

    pub fn known_lipschitz(&self) -> Option<f64> {
        self.smooth.lipschitz()
    }

    pub fn info(&self) -> ProblemInfo {
        ProblemInfo {
            name: self.name.clone(),
            known_lipschitz: self.known_lipschitz(),
            known_fstar: self.known_fstar,
            globally_smooth: self.globally_smooth,
        }
    }

    pub fn check_point(&self, x: &Point) -> Result<()> {
        if x.len() != self.dim() {
            return usage(format!(
                "point has dimension {} but problem '{}' has dimension {}",
                x.len(),
                self.name,
                self.dim()
            ));
        }
        if !all_finite(x) {
            return usage("point has non-finite coordinates");
        }
        Ok(())
    }

    /// `F(x)` without touching any counters.
    pub fn objective(&self, x: &Point) -> Result<f64> {
        self.check_point(x)?;
        let f = self.smooth.value(x);
        if !f.is_finite() {
            return Err(Error::NumericalDomain(format!("smooth value is {f}")));
        }
        Ok(f + self.nonsmooth.value(x))
    }
}

/// Oracle call counts for one solver run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounters {
    pub n_value: u64,
    pub n_gradient: u64,
    pub n_prox: u64,
}

/// Counting front end to a [`CompositeProblem`]. One per solver run.
pub struct Oracle<'p> {
    problem: &'p CompositeProblem,
    counters: EvalCounters,
}

impl<'p> Oracle<'p> {
    pub fn new(problem: &'p CompositeProblem) -> Self {
        Self {
            problem,
            counters: EvalCounters::default(),
        }
    }

    pub fn problem(&self) -> &'p CompositeProblem {
        self.problem
    }

    pub fn counters(&self) -> EvalCounters {
        self.counters
    }

    pub fn value(&mut self, x: &Point) -> Result<f64> {
        self.problem.check_point(x)?;
        self.counters.n_value += 1;
        finite_value(self.problem.smooth.value(x))
    }

    pub fn gradient(&mut self, x: &Point) -> Result<Point> {
        self.problem.check_point(x)?;
        self.counters.n_gradient += 1;
        finite_gradient(self.problem.smooth.gradient(x))
    }

    /// Fused `f(x), ∇f(x)`; counts one value and one gradient evaluation.
    pub fn value_and_gradient(&mut self, x: &Point) -> Result<(f64, Point)> {
        self.problem.check_point(x)?;
        self.counters.n_value += 1;
        self.counters.n_gradient += 1;
        let (f, g) = self.problem.smooth.value_and_gradient(x);
        Ok((finite_value(f)?, finite_gradient(g)?))
    }

    pub fn prox(&mut self, x: &Point, t: f64) -> Result<Point> {
        self.counters.n_prox += 1;
        self.problem.nonsmooth.apply(x, t)
    }

    /// `F(x) = f(x) + h(x)`, counted as one value evaluation.
    pub fn composite_value(&mut self, x: &Point) -> Result<f64> {
        let f = self.value(x)?;
        Ok(f + self.problem.nonsmooth.value(x))
    }
}

fn finite_value(f: f64) -> Result<f64> {
    if f.is_finite() {
        Ok(f)
    } else {
        Err(Error::NumericalDomain(format!("smooth value is {f}")))
    }
}

fn finite_gradient(g: Point) -> Result<Point> {
    if all_finite(&g) {
        Ok(g)
    } else {
        Err(Error::NumericalDomain("gradient has non-finite entries".into()))
    }
}

/// Central-difference gradient `(f(x + h e_i) - f(x - h e_i)) / 2h`.
pub fn finite_difference_gradient(f: &dyn SmoothFn, x: &Point, h: f64) -> Result<Point> {
    if !(1e-9..=1e-3).contains(&h) {
        return usage(format!("finite-difference step {h:e} outside [1e-9, 1e-3]"));
    }
    if !all_finite(x) {
        return usage("point has non-finite coordinates");
    }
    let mut probe = x.clone();
    let mut grad = Point::zeros(x.len());
    for i in 0..x.len() {
        let xi = x[i];
        probe[i] = xi + h;
        let up = f.value(&probe);
        probe[i] = xi - h;
        let down = f.value(&probe);
        probe[i] = xi;
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::NumericalDomain(format!(
                "non-finite probe value along coordinate {i}"
            )));
        }
        grad[i] = (up - down) / (2.0 * h);
    }
    Ok(grad)
}
