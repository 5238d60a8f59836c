use crate::error::{usage, Result};
use crate::linalg::Point;
use crate::solver::Trace;

/// Streaming step-weighted mean `x̄_k = Σ λ_i x_i / Σ λ_i`.
#[derive(Debug, Clone, Default)]
pub struct ErgodicAverager {
    weighted: Option<Point>,
    weight: f64,
}

impl ErgodicAverager {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, lambda: f64, x: &Point) {
        match self.weighted.as_mut() {
            Some(acc) => acc.scaled_add(lambda, x),
            None => self.weighted = Some(x * lambda),
        }
        self.weight += lambda;
    }

    pub fn total_weight(&self) -> f64 {
        self.weight
    }

    pub fn mean(&self) -> Option<Point> {
        self.weighted.as_ref().map(|acc| acc / self.weight)
    }
}

/// `x̄_K` over rows `1..=K` of a trace with retained iterates.
pub fn ergodic_average(trace: &Trace) -> Result<Point> {
    let Some(iterates) = trace.iterates.as_ref() else {
        return usage("ergodic averaging needs a trace with retained iterates");
    };
    let mut avg = ErgodicAverager::new();
    for rec in trace.records.iter().skip(1) {
        avg.push(rec.lambda, &iterates[rec.k]);
    }
    match avg.mean() {
        Some(m) => Ok(m),
        None => usage("ergodic averaging needs at least one iteration"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn mean_of(pairs: &[(f64, f64)]) -> f64 {
        let mut a = ErgodicAverager::new();
        for &(l, x) in pairs {
            a.push(l, &array![x]);
        }
        a.mean().unwrap()[0]
    }

    #[test]
    fn weighted_means() {
        assert_eq!(mean_of(&[(0.7, 0.0), (0.7, 2.0)]), 1.0);
        assert_eq!(mean_of(&[(1.0, 0.0), (3.0, 4.0)]), 3.0);
        assert_eq!(mean_of(&[(0.25, 5.0)]), 5.0);
        assert!(ErgodicAverager::new().mean().is_none());
    }
}
