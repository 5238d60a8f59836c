//! Built-in composite problems and their synthetic data generators.

mod design;
mod factor;
mod lasso;
mod logistic;
mod mc;
mod nmf;
mod quadratic;

pub use design::SparseDesign;
pub use factor::FactorShape;
pub use lasso::{lasso_instance, lasso_problem, lasso_synthetic, LeastSquares};
pub use logistic::{
    default_gamma, logistic_instance, logistic_problem, logistic_smoothness, logistic_synthetic,
    Logistic,
};
pub use mc::{mc_instance, mc_problem, mc_synthetic, McSynthetic, MatrixCompletion, ObservationSet};
pub use nmf::{nmf_instance, nmf_problem, nmf_synthetic, nonneg_product, Nmf};
pub use quadratic::{quadratic_problem, Quadratic};

use crate::linalg::Point;
use crate::oracle::CompositeProblem;

/// A problem together with the starting point used for it.
#[derive(Debug)]
pub struct ProblemInstance {
    pub problem: CompositeProblem,
    pub x0: Point,
}
