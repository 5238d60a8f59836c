//! Post-hoc verification of the inequalities an AdaPGNC-family run must satisfy.
//!
//! The bound constants involve `P = Σρ_k`, which is about `10^10` with the
//! default `ρ_0`, so `Λ = λ₀e^{P/2}` and `ω = (λ/λ₀)² e^{-3P/2}` overflow any
//! float. Everything that touches them is therefore compared in log space.
//! The per-step checks (descent, step condition, growth cap, Lyapunov ratio,
//! per-step sum inequality) do not depend on `P` and stay sharp.

use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::oracle::ProblemInfo;
use crate::solver::{IterationRecord, Trace};

/// Relative slack applied to every comparison.
pub const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    /// `F(x_k) + (λ_{k-1}/2)‖G_k‖² ≤ F(x_{k-1}) + λ³_{k-1}‖G_{k-1}‖²/(2λ_k²) - (λ_{k-1}/2)‖G_{k-1}‖²`.
    Descent,
    /// `λ_k² L_k² + (λ_k²/λ_{k-1}) l_k ≤ 1`.
    StepCondition,
    /// `λ_k ≤ √(1+ρ_{k-1}) λ_{k-1}`, exactly.
    GrowthCap,
    /// `min(λ₀, 1/(2L)) ≤ λ_k ≤ λ₀ e^{P/2}`.
    StepBounds,
    /// `ω_k ≥ (λ/λ₀)² e^{-3P/2}` with `ω_k` from its recursion.
    OmegaBound,
    /// `E_k ≤ (ω_{k-1}/ω_k) E_{k-1} - (λ_{k-1}/2)‖G_{k-1}‖²`, i.e. `V_k ≤ V_{k-1} - (ω_kλ_{k-1}/2)‖G_{k-1}‖²`.
    Lyapunov,
    /// `min_{i<k} ‖G_i‖² ≤ 2V₀/(ωλk)`.
    Complexity,
    /// `Σ_{i≤k} λ_i² ‖∇f(x_i) + h'(x_i)‖² ≤ S`.
    SumBound,
    /// `λ_{k-1}‖∇f(x_k)+h'(x_k)‖² ≤ (λ³_{k-1}/λ_k²)‖G_{k-1}‖² + 2(F(x_{k-1}) - F(x_k))`.
    RealizedSum,
}

impl CheckKind {
    pub const ALL: [CheckKind; 9] = [
        CheckKind::Descent,
        CheckKind::StepCondition,
        CheckKind::GrowthCap,
        CheckKind::StepBounds,
        CheckKind::OmegaBound,
        CheckKind::Lyapunov,
        CheckKind::Complexity,
        CheckKind::SumBound,
        CheckKind::RealizedSum,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            CheckKind::Descent => "(a) F*-free descent",
            CheckKind::StepCondition => "(b) step condition",
            CheckKind::GrowthCap => "(b') growth cap",
            CheckKind::StepBounds => "(c) step bounds",
            CheckKind::OmegaBound => "(d) omega lower bound",
            CheckKind::Lyapunov => "(e) Lyapunov descent",
            CheckKind::Complexity => "(e) complexity bound",
            CheckKind::SumBound => "(f) residual sum bound",
            CheckKind::RealizedSum => "(f) per-step residual bound",
        }
    }
}

/// An inequality `lhs ≤ rhs + slack` that failed at row `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub kind: CheckKind,
    /// Number of rows at which the inequality was evaluated.
    pub evaluated: usize,
    /// Why the check could not run, if it did not.
    pub skipped: Option<String>,
    /// Largest `lhs - rhs` seen (negative means every row had room to spare).
    pub worst_gap: f64,
    pub worst_k: Option<usize>,
    pub violations: Vec<Violation>,
}

impl CheckResult {
    fn new(kind: CheckKind) -> Self {
        Self {
            kind,
            evaluated: 0,
            skipped: None,
            worst_gap: f64::NEG_INFINITY,
            worst_k: None,
            violations: Vec::new(),
        }
    }

    fn skip(kind: CheckKind, why: &str) -> Self {
        Self {
            skipped: Some(why.to_string()),
            ..Self::new(kind)
        }
    }

    fn record(&mut self, k: usize, lhs: f64, rhs: f64, slack: f64) {
        self.evaluated += 1;
        let gap = lhs - rhs;
        if gap > self.worst_gap || self.worst_k.is_none() {
            self.worst_gap = gap;
            self.worst_k = Some(k);
        }
        // NaN on either side counts as a failure.
        if !(lhs <= rhs + slack) {
            self.violations.push(Violation { k, lhs, rhs, slack });
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Log-space constants of the bounds, for callers that reuse them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorBounds {
    /// `P` as supplied.
    pub p_total: f64,
    /// `ln Λ = ln λ₀ + P/2`.
    pub log_lambda_upper: f64,
    /// `ln λ = ln min(λ₀, 1/(2L))`, when `L` is known.
    pub log_lambda_lower: Option<f64>,
    /// `ln ω = 2 ln(λ/λ₀) - 3P/2`.
    pub log_omega_lower: Option<f64>,
    /// `F*` used for the gap-based checks.
    pub fstar: Option<f64>,
    /// `V₀ = F(x₀) - F* + λ₀‖G₀‖²/2`.
    pub v0: Option<f64>,
    /// `ln S`.
    pub log_sum_bound: Option<f64>,
    /// `ln ω_k` for every row, by recursion.
    pub log_omega: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub checks: Vec<CheckResult>,
    pub bounds: MonitorBounds,
}

impl MonitorReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn check(&self, kind: CheckKind) -> &CheckResult {
        self.checks
            .iter()
            .find(|c| c.kind == kind)
            .expect("every kind is reported")
    }

    /// `(kind, k)` of the first failure of each failing check.
    pub fn failures(&self) -> Vec<(CheckKind, usize)> {
        self.checks
            .iter()
            .filter_map(|c| c.violations.first().map(|v| (c.kind, v.k)))
            .collect()
    }
}

/// `ln(e^a + e^b)`.
fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

fn ln_pos(v: f64) -> f64 {
    if v > 0.0 {
        v.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// `ln ω_k` for `k = 0..=K` via
/// `ω_k = ω_{k-1} λ_k² / (λ_{k-1}² (1+ρ_{k-1}) √(1+ρ_{k-2}))`, `ω₀ = 1`.
///
/// `lambdas[k] = λ_k`; `rho_used[k] = ρ_{k-1}` (so `rho_used[0] = ρ_{-1} = 0`).
pub fn log_omega_sequence(lambdas: &[f64], rho_used: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(lambdas.len());
    if lambdas.is_empty() {
        return out;
    }
    out.push(0.0);
    for k in 1..lambdas.len() {
        let step = 2.0 * (lambdas[k].ln() - lambdas[k - 1].ln())
            - rho_used[k].ln_1p()
            - 0.5 * rho_used[k - 1].ln_1p();
        out.push(out[k - 1] + step);
    }
    out
}

/// Checks a finished AdaPGNC, relaxed or BB trace.
///
/// `rho_total` is an upper bound on `P`. Bounds that need `L` are skipped when
/// the problem has none; gap-based checks are skipped without `F*`; the sum
/// checks are skipped when rows carry no residuals (e.g. replayed from CSV).
pub fn monitor_check(trace: &Trace, info: &ProblemInfo, rho_total: f64) -> Result<MonitorReport> {
    if !trace.engine.uses_rho() {
        return usage(format!(
            "the monitor covers the adaptive engines only, not {}",
            trace.engine
        ));
    }
    if !info.globally_smooth {
        return usage(format!(
            "problem '{}' is not attested globally smooth",
            info.name
        ));
    }
    if trace.records.is_empty() {
        return usage("cannot monitor an empty trace");
    }
    if !(rho_total >= 0.0) {
        return usage(format!("rho_total must be nonnegative, got {rho_total}"));
    }
    let r: &[IterationRecord] = &trace.records;
    let n = r.len();
    let lam: Vec<f64> = r.iter().map(|x| x.lambda).collect();
    let g: Vec<f64> = r.iter().map(|x| x.gradmap_norm).collect();
    let big_f: Vec<f64> = r.iter().map(|x| x.composite_value).collect();
    let rho_used: Vec<f64> = r.iter().map(|x| x.rho_used).collect();
    let lambda0 = trace.lambda0;
    let p = rho_total;
    let obj_slack = |k: usize| SLACK * (1.0 + big_f[k - 1].abs());
    let dimless_slack = |rhs: f64| SLACK * rhs.abs().max(1.0);

    let log_lambda_upper = lambda0.ln() + 0.5 * p;
    let log_lambda_lower = info
        .known_lipschitz
        .map(|l| lambda0.min(1.0 / (2.0 * l)).ln());
    let log_omega_lower = log_lambda_lower.map(|ll| 2.0 * (ll - lambda0.ln()) - 1.5 * p);
    let log_omega = log_omega_sequence(&lam, &rho_used);
    let fstar = info.known_fstar;
    let v0 = fstar.map(|fs| big_f[0] - fs + 0.5 * lambda0 * g[0] * g[0]);

    let mut descent = CheckResult::new(CheckKind::Descent);
    let mut step_cond = CheckResult::new(CheckKind::StepCondition);
    let mut growth = CheckResult::new(CheckKind::GrowthCap);
    let mut bounds = CheckResult::new(CheckKind::StepBounds);
    for k in 1..n {
        let (lp, lk) = (lam[k - 1], lam[k]);
        let gp2 = g[k - 1] * g[k - 1];
        let lhs = big_f[k] + 0.5 * lp * g[k] * g[k];
        let rhs = big_f[k - 1] + lp * lp * lp * gp2 / (2.0 * lk * lk) - 0.5 * lp * gp2;
        descent.record(k, lhs, rhs, obj_slack(k));

        let (uc, lc) = (r[k].upper_curv, r[k].lower_curv);
        let lhs = lk * lk * uc * uc + lk * lk / lp * lc;
        step_cond.record(k, lhs, 1.0, dimless_slack(1.0));

        growth.record(k, lk, (1.0 + rho_used[k]).sqrt() * lp, 0.0);

        let ln_lk = lk.ln();
        // Record whichever side is tighter so worst_gap reflects both.
        let upper_gap = ln_lk - log_lambda_upper;
        let lower_gap = log_lambda_lower.map_or(f64::NEG_INFINITY, |ll| ll - ln_lk);
        if upper_gap >= lower_gap {
            bounds.record(k, ln_lk, log_lambda_upper, dimless_slack(log_lambda_upper));
        } else {
            let ll = log_lambda_lower.unwrap();
            bounds.record(k, ll, ln_lk, dimless_slack(ln_lk));
        }
    }

    let omega = match log_omega_lower {
        Some(lo) => {
            let mut c = CheckResult::new(CheckKind::OmegaBound);
            for k in 1..n {
                // ω_k ≥ ω written as -ln ω_k ≤ -ln ω.
                c.record(k, -log_omega[k], -lo, dimless_slack(lo));
            }
            c
        }
        None => CheckResult::skip(CheckKind::OmegaBound, "no known Lipschitz constant"),
    };

    let lyapunov = match fstar {
        Some(fs) => {
            let mut c = CheckResult::new(CheckKind::Lyapunov);
            let mut e_prev = v0.unwrap();
            for k in 1..n {
                let e_k = big_f[k] - fs + 0.5 * lam[k - 1] * g[k] * g[k];
                let ratio = (lam[k - 1] / lam[k]).powi(2)
                    * (1.0 + rho_used[k])
                    * (1.0 + rho_used[k - 1]).sqrt();
                let rhs = ratio * e_prev - 0.5 * lam[k - 1] * g[k - 1] * g[k - 1];
                c.record(k, e_k, rhs, obj_slack(k));
                e_prev = e_k;
            }
            c
        }
        None => CheckResult::skip(CheckKind::Lyapunov, "F* unknown"),
    };

    let complexity = match (v0, log_lambda_lower, log_omega_lower) {
        (Some(v0), Some(ll), Some(lo)) => {
            let mut c = CheckResult::new(CheckKind::Complexity);
            let log_2v0 = ln_pos(2.0 * v0);
            let mut min_g2 = f64::INFINITY;
            for k in 1..n {
                min_g2 = min_g2.min(g[k - 1] * g[k - 1]);
                let rhs = log_2v0 - lo - ll - (k as f64).ln();
                c.record(k, ln_pos(min_g2), rhs, dimless_slack(rhs));
            }
            c
        }
        (None, ..) => CheckResult::skip(CheckKind::Complexity, "F* unknown"),
        _ => CheckResult::skip(CheckKind::Complexity, "no known Lipschitz constant"),
    };

    let have_residuals = r.iter().skip(1).all(|x| x.residual.is_some());
    let log_sum_bound = match (v0, fstar, log_lambda_lower, log_omega_lower) {
        (Some(v0), Some(fs), Some(ll), Some(lo)) => {
            let a = ln_pos(2.0 * v0) + 2.0 * log_lambda_upper - lo - 2.0 * ll;
            let b = ln_pos(2.0 * (big_f[0] - fs));
            Some(2.0 * log_lambda_upper - ll + log_add_exp(a, b))
        }
        _ => None,
    };
    let sum_bound = match (log_sum_bound, have_residuals) {
        (Some(ls), true) => {
            let mut c = CheckResult::new(CheckKind::SumBound);
            let mut log_sum = f64::NEG_INFINITY;
            for k in 1..n {
                let res = r[k].residual.unwrap();
                log_sum = log_add_exp(log_sum, 2.0 * (lam[k].ln() + ln_pos(res)));
                c.record(k, log_sum, ls, dimless_slack(ls));
            }
            c
        }
        (None, _) => CheckResult::skip(CheckKind::SumBound, "needs F* and a Lipschitz constant"),
        (_, false) => CheckResult::skip(CheckKind::SumBound, "trace carries no residuals"),
    };

    let realized = if have_residuals {
        let mut c = CheckResult::new(CheckKind::RealizedSum);
        for k in 1..n {
            let res = r[k].residual.unwrap();
            let (lp, lk) = (lam[k - 1], lam[k]);
            let lhs = lp * res * res;
            let rhs = lp * lp * lp / (lk * lk) * g[k - 1] * g[k - 1] + 2.0 * (big_f[k - 1] - big_f[k]);
            c.record(k, lhs, rhs, obj_slack(k));
        }
        c
    } else {
        CheckResult::skip(CheckKind::RealizedSum, "trace carries no residuals")
    };

    Ok(MonitorReport {
        checks: vec![
            descent, step_cond, growth, bounds, omega, lyapunov, complexity, sum_bound, realized,
        ],
        bounds: MonitorBounds {
            p_total: p,
            log_lambda_upper,
            log_lambda_lower,
            log_omega_lower,
            fstar,
            v0,
            log_sum_bound,
            log_omega,
        },
    })
}
