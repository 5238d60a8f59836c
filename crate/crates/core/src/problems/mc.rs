//! Low-rank matrix completion with a balancing regularizer,
//! `f(U, V) = (1/2N) Σ_Ω ((UVᵀ)ᵢⱼ - s)² + (1/2N)‖UᵀU - VᵀV‖_F²`.

use std::collections::HashSet;

use ndarray::{Array2, ArrayView2};

use super::{FactorShape, ProblemInstance};
use crate::error::{usage, Result};
use crate::linalg::Point;
use crate::oracle::{CompositeProblem, SmoothFn};
use crate::prox::ProxKind;
use crate::rng::SeededRng;

/// Observed entries `(i, j, s)` of a `p × q` matrix, each position at most once.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl ObservationSet {
    pub fn new(rows: usize, cols: usize, entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(entries.len());
        for &(i, j, s) in &entries {
            if i >= rows || j >= cols {
                return usage(format!("observation ({i}, {j}) outside a {rows}x{cols} matrix"));
            }
            if !s.is_finite() {
                return usage(format!("observation ({i}, {j}) is not finite"));
            }
            if !seen.insert((i, j)) {
                return usage(format!("duplicate observation at ({i}, {j})"));
            }
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }
}

pub struct MatrixCompletion {
    obs: ObservationSet,
    shape: FactorShape,
}

fn row_dot(u: &ArrayView2<f64>, i: usize, v: &ArrayView2<f64>, j: usize) -> f64 {
    let mut acc = 0.0;
    for c in 0..u.ncols() {
        acc += u[[i, c]] * v[[j, c]];
    }
    acc
}

impl MatrixCompletion {
    pub fn new(obs: ObservationSet, shape: FactorShape) -> Result<Self> {
        if obs.is_empty() {
            return usage("matrix completion needs at least one observation");
        }
        if obs.rows != shape.rows_u || obs.cols != shape.rows_v {
            return usage(format!(
                "observations index a {}x{} matrix but factors give {}x{}",
                obs.rows, obs.cols, shape.rows_u, shape.rows_v
            ));
        }
        Ok(Self { obs, shape })
    }

    /// The observation misfit alone, `(1/2N) Σ_Ω ((UVᵀ)ᵢⱼ - s)²`.
    pub fn data_term(&self, x: &Point) -> f64 {
        let (u, v) = self.shape.split(x);
        let mut acc = 0.0;
        for &(i, j, s) in &self.obs.entries {
            let r = row_dot(&u, i, &v, j) - s;
            acc += r * r;
        }
        acc / (2.0 * self.obs.len() as f64)
    }

    /// `UᵀU - VᵀV`.
    fn imbalance(u: &ArrayView2<f64>, v: &ArrayView2<f64>) -> Array2<f64> {
        u.t().dot(u) - v.t().dot(v)
    }
}

impl SmoothFn for MatrixCompletion {
    fn dim(&self) -> usize {
        self.shape.dim()
    }

    fn value(&self, x: &Point) -> f64 {
        self.value_and_gradient(x).0
    }

    fn gradient(&self, x: &Point) -> Point {
        self.value_and_gradient(x).1
    }

    fn value_and_gradient(&self, x: &Point) -> (f64, Point) {
        let (u, v) = self.shape.split(x);
        let n_obs = self.obs.len() as f64;
        let rank = self.shape.rank;
        let mut gu = Array2::<f64>::zeros(u.dim());
        let mut gv = Array2::<f64>::zeros(v.dim());
        let mut data = 0.0;
        for &(i, j, s) in &self.obs.entries {
            let r = row_dot(&u, i, &v, j) - s;
            data += r * r;
            let w = r / n_obs;
            for c in 0..rank {
                gu[[i, c]] += w * v[[j, c]];
                gv[[j, c]] += w * u[[i, c]];
            }
        }
        let d = Self::imbalance(&u, &v);
        let mut reg = 0.0;
        for e in d.iter() {
            reg += e * e;
        }
        gu.scaled_add(2.0 / n_obs, &u.dot(&d));
        gv.scaled_add(-2.0 / n_obs, &v.dot(&d));
        ((data + reg) / (2.0 * n_obs), self.shape.join(&gu, &gv))
    }
}

/// Matrix completion with `h ≡ 0`. The quartic balancing term means `∇f` is
/// only locally Lipschitz; no constant is attached.
pub fn mc_problem(obs: ObservationSet, shape: FactorShape) -> Result<CompositeProblem> {
    CompositeProblem::new("mc", MatrixCompletion::new(obs, shape)?, ProxKind::Zero)
}

/// Synthetic completion data with its planted factors.
#[derive(Debug, Clone)]
pub struct McSynthetic {
    pub obs: ObservationSet,
    pub shape: FactorShape,
    /// `[vec(U*); vec(V*)]`.
    pub truth: Point,
}

/// Standard-normal `U*` (`p × r`) and `V*` (`q × r`), then `N` distinct
/// positions sampled uniformly without replacement, observed with additive
/// Gaussian noise of the given scale.
pub fn mc_synthetic(
    p: usize,
    q: usize,
    r: usize,
    n_obs: usize,
    noise: f64,
    seed: u64,
) -> Result<McSynthetic> {
    let mut rng = SeededRng::new(seed);
    mc_data(&mut rng, p, q, r, n_obs, noise)
}

fn mc_data(
    rng: &mut SeededRng,
    p: usize,
    q: usize,
    r: usize,
    n_obs: usize,
    noise: f64,
) -> Result<McSynthetic> {
    let shape = FactorShape::new(p, q, r)?;
    if n_obs == 0 || n_obs > p * q {
        return usage(format!("cannot observe {n_obs} entries of a {p}x{q} matrix"));
    }
    if !(noise.is_finite() && noise >= 0.0) {
        return usage(format!("noise scale must be nonnegative, got {noise}"));
    }
    let truth = Point::from(rng.normals(shape.dim()));
    let (u, v) = shape.split(&truth);
    let mut entries = Vec::with_capacity(n_obs);
    for flat in rng.sample_distinct(p * q, n_obs) {
        let (i, j) = (flat / q, flat % q);
        let s = row_dot(&u, i, &v, j) + noise * rng.normal();
        entries.push((i, j, s));
    }
    Ok(McSynthetic {
        obs: ObservationSet::new(p, q, entries)?,
        shape,
        truth,
    })
}

/// Synthetic instance started from small Gaussian factors (scale 0.1) drawn
/// after the data.
pub fn mc_instance(
    p: usize,
    q: usize,
    r: usize,
    n_obs: usize,
    noise: f64,
    seed: u64,
) -> Result<ProblemInstance> {
    let mut rng = SeededRng::new(seed);
    let data = mc_data(&mut rng, p, q, r, n_obs, noise)?;
    let x0 = Point::from(rng.normals(data.shape.dim())) * 0.1;
    Ok(ProblemInstance {
        problem: mc_problem(data.obs, data.shape)?,
        x0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;
    use ndarray::array;

    #[test]
    fn scalar_terms() {
        let obs = ObservationSet::new(1, 1, vec![(0, 0, 5.0)]).unwrap();
        let f = MatrixCompletion::new(obs, FactorShape::new(1, 1, 1).unwrap()).unwrap();
        let x = array![2.0, 3.0];
        assert_eq!(f.data_term(&x), 0.5);
        assert_eq!(f.value(&x), 0.5 + 12.5);
        // ∂u = r·v + 2u(u² - v²) = 3 - 20, ∂v = r·u - 2v(u² - v²) = 2 + 30.
        assert_eq!(f.gradient(&x), array![-17.0, 32.0]);
    }

    #[test]
    fn balanced_exact_fit_is_stationary() {
        let shape = FactorShape::new(3, 3, 2).unwrap();
        let u = array![[1.0, 0.5], [-0.3, 2.0], [0.7, -1.1]];
        let x = shape.join(&u, &u);
        let prod = u.dot(&u.t());
        let entries = vec![(0, 0, prod[[0, 0]]), (1, 2, prod[[1, 2]]), (2, 1, prod[[2, 1]])];
        let f = MatrixCompletion::new(ObservationSet::new(3, 3, entries).unwrap(), shape).unwrap();
        let (val, grad) = f.value_and_gradient(&x);
        assert_eq!(val, 0.0);
        assert_eq!(norm(&grad), 0.0);
    }

    #[test]
    fn observation_validation() {
        assert!(ObservationSet::new(2, 2, vec![(2, 0, 1.0)]).is_err());
        assert!(ObservationSet::new(2, 2, vec![(0, 1, 1.0), (0, 1, 2.0)]).is_err());
        let obs = ObservationSet::new(2, 2, vec![(0, 1, 1.0)]).unwrap();
        assert!(mc_problem(obs, FactorShape::new(3, 2, 1).unwrap()).is_err());
    }

    #[test]
    fn synthetic_noise_free_data_term_vanishes() {
        let d = mc_synthetic(15, 12, 3, 60, 0.0, 1).unwrap();
        assert_eq!(d.obs.len(), 60);
        let f = MatrixCompletion::new(d.obs.clone(), d.shape).unwrap();
        assert!(f.data_term(&d.truth) < 1e-28);
        let (u, v) = d.shape.split(&d.truth);
        let imb = MatrixCompletion::imbalance(&u, &v);
        let expected = imb.iter().map(|e| e * e).sum::<f64>() / 120.0;
        assert!((f.value(&d.truth) - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn full_observation_covers_every_entry() {
        let d = mc_synthetic(4, 3, 2, 12, 0.1, 7).unwrap();
        let seen: HashSet<(usize, usize)> = d.obs.entries().iter().map(|&(i, j, _)| (i, j)).collect();
        assert_eq!(seen.len(), 12);
        assert!(mc_synthetic(4, 3, 2, 13, 0.1, 7).is_err());
    }
}
