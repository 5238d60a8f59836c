//! L2-regularized logistic regression,
//! `f(x) = (1/m) Σ [softplus(aᵢᵀx) - yᵢ aᵢᵀx] + (γ/2)‖x‖²`.

use super::{ProblemInstance, SparseDesign};
use crate::error::{usage, Result};
use crate::linalg::{norm_sq, Point};
use crate::oracle::{CompositeProblem, SmoothFn};
use crate::prox::ProxKind;
use crate::rng::SeededRng;

pub struct Logistic {
    design: SparseDesign,
    gamma: f64,
    lipschitz: f64,
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Smoothness constant of the unregularized loss, `λ_max(AᵀA) / (4m)`.
pub fn logistic_smoothness(design: &SparseDesign) -> f64 {
    design.gram_top_eigenvalue() / (4.0 * design.n_rows() as f64)
}

/// `L₀/m` for designs below 100k rows, `L₀/(10m)` above, where `L₀` is the
/// smoothness constant of the unregularized loss.
pub fn default_gamma(design: &SparseDesign) -> f64 {
    let m = design.n_rows() as f64;
    let base = logistic_smoothness(design) / m;
    if design.n_rows() < 100_000 {
        base
    } else {
        base / 10.0
    }
}

impl Logistic {
    pub fn new(design: SparseDesign, gamma: f64) -> Result<Self> {
        if design.n_rows() == 0 || design.n_cols() == 0 {
            return usage("logistic regression needs a nonempty design");
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return usage(format!("gamma must be nonnegative, got {gamma}"));
        }
        let lipschitz = logistic_smoothness(&design) + gamma;
        Ok(Self {
            design,
            gamma,
            lipschitz,
        })
    }

    pub fn design(&self) -> &SparseDesign {
        &self.design
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

impl SmoothFn for Logistic {
    fn dim(&self) -> usize {
        self.design.n_cols()
    }

    fn value(&self, x: &Point) -> f64 {
        let m = self.design.n_rows();
        let mut loss = 0.0;
        for i in 0..m {
            let z = self.design.row_dot(i, x);
            loss += softplus(z) - self.design.label(i) * z;
        }
        loss / m as f64 + 0.5 * self.gamma * norm_sq(x)
    }

    fn gradient(&self, x: &Point) -> Point {
        self.value_and_gradient(x).1
    }

    fn value_and_gradient(&self, x: &Point) -> (f64, Point) {
        let m = self.design.n_rows();
        let inv_m = 1.0 / m as f64;
        let mut loss = 0.0;
        let mut residual = Vec::with_capacity(m);
        for i in 0..m {
            let z = self.design.row_dot(i, x);
            let y = self.design.label(i);
            loss += softplus(z) - y * z;
            residual.push((sigmoid(z) - y) * inv_m);
        }
        let mut grad = self.design.mul_t_vec(&residual);
        grad.scaled_add(self.gamma, x);
        (loss * inv_m + 0.5 * self.gamma * norm_sq(x), grad)
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.lipschitz)
    }
}

/// Logistic regression with `h ≡ 0`; known `L = λ_max(AᵀA)/(4m) + γ`.
pub fn logistic_problem(design: SparseDesign, gamma: f64) -> Result<CompositeProblem> {
    CompositeProblem::new("logistic", Logistic::new(design, gamma)?, ProxKind::Zero)
}

/// Dense Gaussian design with geometrically decaying column scales (1 down to
/// 0.01) and labels drawn from a planted logistic model.
pub fn logistic_synthetic(m: usize, n: usize, seed: u64) -> SparseDesign {
    let mut rng = SeededRng::new(seed);
    let scales: Vec<f64> = (0..n)
        .map(|j| {
            let t = if n > 1 { j as f64 / (n - 1) as f64 } else { 0.0 };
            10f64.powf(-2.0 * t)
        })
        .collect();
    let truth = rng.normals(n);
    let mut design = SparseDesign::new(n);
    for _ in 0..m {
        let row: Vec<(usize, f64)> = (0..n).map(|j| (j, scales[j] * rng.normal())).collect();
        let z: f64 = row.iter().map(|&(j, v)| v * truth[j] / scales[j].sqrt()).sum();
        let label = if rng.uniform() < sigmoid(z) { 1.0 } else { 0.0 };
        design.push_row(&row, label).expect("generated rows are well formed");
    }
    design
}

/// Synthetic `m × n` instance with the default regularization, started from a
/// seeded standard-normal point.
pub fn logistic_instance(m: usize, n: usize, seed: u64) -> Result<ProblemInstance> {
    let design = logistic_synthetic(m, n, seed);
    let gamma = default_gamma(&design);
    let problem = logistic_problem(design, gamma)?;
    let x0 = Point::from(SeededRng::new(seed.wrapping_add(0x5eed)).normals(n));
    Ok(ProblemInstance { problem, x0 })
}
