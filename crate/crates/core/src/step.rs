//! Step-size engines: the AdaPGNC branch rule and its relaxed and
//! Barzilai–Borwein variants, the AdGD baseline, Armijo backtracking, plus the
//! secant curvature estimates and the summable growth sequences that drive them.
//!
//! Step arithmetic follows IEEE semantics with `c / 0 = +∞`, so a vanishing
//! curvature estimate simply removes its term from the `min`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::linalg::{dist, dot, norm, norm_sq, Point};

/// Local secant estimates of the upper and lower curvature of `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvaturePair {
    /// `L_k = ‖∇f(x_k) - ∇f(x_{k-1})‖ / ‖x_k - x_{k-1}‖`.
    pub upper: f64,
    /// `l_k`; nonpositive exactly when the convexity inequality holds along the step.
    pub lower: f64,
}

/// Rolling window consumed at iteration `k`.
#[derive(Debug, Clone)]
pub struct StepState {
    pub k: usize,
    pub x_prev: Point,
    pub x_cur: Point,
    pub grad_prev: Point,
    pub grad_cur: Point,
    pub f_prev: f64,
    pub f_cur: f64,
    /// `λ_{k-1}`.
    pub lambda_prev: f64,
    /// `λ_{k-2}`; zero when it does not exist yet.
    pub lambda_prevprev: f64,
}

/// Relative size of `‖Δx‖` below which consecutive iterates count as equal.
pub const DEGENERACY_REL: f64 = 1e-15;

/// `|l_k|` below `LOWER_SNAP · max(1, L_k² λ_{k-1})` is treated as zero.
pub const LOWER_SNAP: f64 = 1e-12;

/// Relative rounding error assumed for a computed objective value. The
/// numerator of `l_k` is discarded when it is smaller than this much of the
/// values it was formed from.
pub const VALUE_ROUNDOFF: f64 = 1e-13;

pub fn degeneracy_threshold(x_cur: &Point) -> f64 {
    DEGENERACY_REL * (1.0 + norm(x_cur))
}

pub fn estimate_curvature(state: &StepState) -> Result<CurvaturePair> {
    let step_norm = dist(&state.x_cur, &state.x_prev);
    let threshold = degeneracy_threshold(&state.x_cur);
    if step_norm < threshold || step_norm == 0.0 {
        return Err(Error::DegenerateStep {
            step_norm,
            threshold,
        });
    }
    let upper = dist(&state.grad_cur, &state.grad_prev) / step_norm;
    let back = &state.x_prev - &state.x_cur;
    let slope = dot(&state.grad_cur, &back);
    let numerator = state.f_cur - state.f_prev + slope;
    let mut lower = 2.0 * numerator / (step_norm * step_norm);
    // f_cur - f_prev cancels catastrophically near convergence; below the
    // rounding error of its inputs the sign of l_k is unknowable.
    let noise = VALUE_ROUNDOFF * (state.f_cur.abs() + state.f_prev.abs() + slope.abs());
    if numerator.abs() <= noise
        || lower.abs() < LOWER_SNAP * f64::max(1.0, upper * upper * state.lambda_prev)
    {
        lower = 0.0;
    }
    Ok(CurvaturePair { upper, lower })
}

fn check_inputs(lambda_prev: f64, rho: f64, curv: &CurvaturePair) -> Result<()> {
    if !(lambda_prev.is_finite() && lambda_prev > 0.0) {
        return usage(format!("previous step must be positive and finite, got {lambda_prev}"));
    }
    if !(rho.is_finite() && rho >= 0.0) {
        return usage(format!("growth parameter must be nonnegative and finite, got {rho}"));
    }
    if !(curv.upper.is_finite() && curv.upper >= 0.0 && curv.lower.is_finite()) {
        return usage(format!("invalid curvature estimates {curv:?}"));
    }
    Ok(())
}

fn growth_cap(lambda_prev: f64, rho: f64) -> f64 {
    (1.0 + rho).sqrt() * lambda_prev
}

/// The AdaPGNC rule: `min{√(1+ρ)λ_{k-1}, 1/L_k}` when `l_k ≤ 0`, otherwise
/// `min{√(1+ρ)λ_{k-1}, 1/(√2 L_k), √(λ_{k-1}/(2 l_k))}`.
pub fn adapgnc_step(lambda_prev: f64, rho: f64, curv: CurvaturePair) -> Result<f64> {
    check_inputs(lambda_prev, rho, &curv)?;
    let cap = growth_cap(lambda_prev, rho);
    let step = if curv.lower <= 0.0 {
        cap.min(1.0 / curv.upper)
    } else {
        cap.min(std::f64::consts::FRAC_1_SQRT_2 / curv.upper)
            .min((lambda_prev / (2.0 * curv.lower)).sqrt())
    };
    Ok(step)
}

/// `min{√(1+ρ)λ_{k-1}, ([L_k² + l_k/λ_{k-1}]₊)^{-1/2}}`, with `0^{-1/2} = +∞`.
pub fn relaxed_step(lambda_prev: f64, rho: f64, curv: CurvaturePair) -> Result<f64> {
    check_inputs(lambda_prev, rho, &curv)?;
    let curvature = (curv.upper * curv.upper + curv.lower / lambda_prev).max(0.0);
    let bound = if curvature == 0.0 {
        f64::INFINITY
    } else {
        1.0 / curvature.sqrt()
    };
    Ok(growth_cap(lambda_prev, rho).min(bound))
}

/// Short Barzilai–Borwein step `⟨dg, dx⟩ / ‖dg‖²`, `+∞` when `dg = 0`.
///
/// Only meaningful for convex `f`; a nonpositive inner product with nonzero
/// `dg` is reported as [`Error::NonconvexDetected`].
pub fn bb_term(dx: &Point, dg: &Point) -> Result<f64> {
    if dx.len() != dg.len() {
        return usage("bb_term: dimension mismatch");
    }
    if norm_sq(dx) == 0.0 {
        return usage("bb_term requires a nonzero step");
    }
    let dg_sq = norm_sq(dg);
    if dg_sq == 0.0 {
        return Ok(f64::INFINITY);
    }
    let inner = dot(dg, dx);
    if inner <= 0.0 {
        return Err(Error::NonconvexDetected { inner });
    }
    Ok(inner / dg_sq)
}

/// `min{√(1+ρ)λ_{k-1}, λ^BB_k}` (convex problems only).
pub fn bb_step(lambda_prev: f64, rho: f64, dx: &Point, dg: &Point) -> Result<f64> {
    check_inputs(
        lambda_prev,
        rho,
        &CurvaturePair {
            upper: 0.0,
            lower: 0.0,
        },
    )?;
    Ok(growth_cap(lambda_prev, rho).min(bb_term(dx, dg)?))
}

/// AdGD: `min{√(1+θ)λ_{k-1}, 1/(2L_k)}` with `θ = λ_{k-1}/λ_{k-2}`.
///
/// Passing `lambda_prevprev = 0` gives `θ = +∞`, the usual first-step choice.
pub fn adgd_step(lambda_prev: f64, lambda_prevprev: f64, curv: CurvaturePair) -> Result<f64> {
    check_inputs(lambda_prev, 0.0, &curv)?;
    if !(lambda_prevprev.is_finite() && lambda_prevprev >= 0.0) {
        return usage(format!("invalid λ_(k-2) = {lambda_prevprev}"));
    }
    let theta = lambda_prev / lambda_prevprev;
    let step = ((1.0 + theta).sqrt() * lambda_prev).min(1.0 / (2.0 * curv.upper));
    if !step.is_finite() {
        return Err(Error::NumericalDomain(
            "AdGD step is unbounded (infinite growth and zero curvature)".into(),
        ));
    }
    Ok(step)
}

pub const ARMIJO_INITIAL_STEP: f64 = 1e-3;
pub const ARMIJO_MAX_HALVINGS: u32 = 60;

/// Backtracking from `1e-3`: the smallest `m ≥ 0` with
/// `f(x - 1e-3·2^{-m} g) ≤ f(x) - 1e-3·2^{-(m+1)} ‖g‖²`.
///
/// `value` is called once per trial; `fx` is `f(x)`.
pub fn armijo_search<F>(mut value: F, x: &Point, fx: f64, grad: &Point) -> Result<(f64, u32)>
where
    F: FnMut(&Point) -> Result<f64>,
{
    let grad_sq = norm_sq(grad);
    if grad_sq == 0.0 {
        return usage("Armijo search needs a nonzero gradient");
    }
    for m in 0..=ARMIJO_MAX_HALVINGS {
        let step = ARMIJO_INITIAL_STEP * 0.5f64.powi(m as i32);
        let trial = x - &(grad * step);
        let ft = value(&trial)?;
        if ft <= fx - 0.5 * step * grad_sq {
            return Ok((step, m));
        }
    }
    Err(Error::LineSearchFailed {
        halvings: ARMIJO_MAX_HALVINGS,
    })
}

/// The summable growth sequences `{ρ_k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RhoKind {
    /// `min{λ_k/λ_{k-1}, 100 (ln(k+1))⁴ / (k+1)^1.1}`.
    Rho1,
    /// `100 (ln(k+1))⁴ / (k+1)^1.1`.
    Rho2,
    /// `ρ_k = 0` for `k ≥ 1`.
    ConstantZero,
    /// Explicit values for `k = 1, 2, …`; zero past the end of the table.
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoSequence {
    pub kind: RhoKind,
    /// `ρ_0`.
    pub rho0: f64,
}

pub const DEFAULT_RHO0: f64 = 1e10;

/// `100 (ln(k+1))⁴ / (k+1)^1.1`.
pub fn rho2_term(k: usize) -> f64 {
    let j = (k + 1) as f64;
    100.0 * j.ln().powi(4) / j.powf(1.1)
}

impl RhoSequence {
    pub fn rho1() -> Self {
        Self {
            kind: RhoKind::Rho1,
            rho0: DEFAULT_RHO0,
        }
    }

    pub fn rho2() -> Self {
        Self {
            kind: RhoKind::Rho2,
            rho0: DEFAULT_RHO0,
        }
    }

    /// `ρ ≡ 0`, so steps can never grow.
    pub fn zero() -> Self {
        Self {
            kind: RhoKind::ConstantZero,
            rho0: 0.0,
        }
    }

    /// `table[0]` becomes `ρ_0`, the rest are `ρ_1, ρ_2, …`.
    pub fn custom(table: Vec<f64>) -> Self {
        let rho0 = table.first().copied().unwrap_or(0.0);
        let rest = table.into_iter().skip(1).collect();
        Self {
            kind: RhoKind::Custom(rest),
            rho0,
        }
    }

    pub fn needs_ratio(&self) -> bool {
        matches!(self.kind, RhoKind::Rho1)
    }

    /// `ρ_k`. `lambda_ratio = λ_k/λ_{k-1}` is required for `Rho1` when `k ≥ 1`.
    pub fn value(&self, k: usize, lambda_ratio: Option<f64>) -> Result<f64> {
        if k == 0 {
            return Ok(self.rho0);
        }
        let v = match &self.kind {
            RhoKind::Rho2 => rho2_term(k),
            RhoKind::Rho1 => {
                let ratio = match lambda_ratio {
                    Some(r) if r.is_finite() && r > 0.0 => r,
                    Some(r) => return usage(format!("invalid step ratio {r}")),
                    None => return usage("Rho1 needs the step ratio λ_k/λ_(k-1)"),
                };
                ratio.min(rho2_term(k))
            }
            RhoKind::ConstantZero => 0.0,
            RhoKind::Custom(table) => table.get(k - 1).copied().unwrap_or(0.0),
        };
        Ok(v)
    }

    /// An upper bound on `P = Σ_k ρ_k`.
    ///
    /// `Rho1` is dominated termwise by `Rho2`, so both report the `Rho2` total.
    pub fn total(&self) -> f64 {
        match &self.kind {
            RhoKind::Rho1 | RhoKind::Rho2 => self.rho0 + rho2_series_total(),
            RhoKind::ConstantZero => self.rho0,
            RhoKind::Custom(table) => self.rho0 + table.iter().sum::<f64>(),
        }
    }
}

const SERIES_TERMS: usize = 2_000_000;

/// Upper bound on `Σ_{k≥1} 100 (ln(k+1))⁴/(k+1)^1.1`: an explicit partial sum
/// plus the integral of the (eventually decreasing) summand over the tail.
pub fn rho2_series_total() -> f64 {
    static TOTAL: OnceLock<f64> = OnceLock::new();
    *TOTAL.get_or_init(|| {
        let mut partial = 0.0;
        let mut last = 0;
        for k in 1..=SERIES_TERMS {
            let term = rho2_term(k);
            partial += term;
            last = k;
            if term < 1e-14 {
                break;
            }
        }
        // Remaining terms are g(j) for j ≥ last + 2 with g(x) = 100 (ln x)⁴ x^{-1.1},
        // decreasing past x = e^{40/11}, so they are bounded by ∫_{last+1}^∞ g.
        partial + rho2_tail_integral(((last + 1) as f64).ln())
    })
}

/// `∫_{e^u}^∞ 100 (ln x)⁴ x^{-1.1} dx = 100 ∫_u^∞ s⁴ e^{-s/10} ds`, in closed form.
fn rho2_tail_integral(u: f64) -> f64 {
    let a: f64 = 0.1;
    let mut acc = 0.0;
    let mut factorial_ratio = 24.0; // 4!/j!
    for j in 0..=4 {
        if j > 0 {
            factorial_ratio /= j as f64;
        }
        acc += factorial_ratio * u.powi(j) / a.powi(5 - j);
    }
    100.0 * (-a * u).exp() * acc
}
