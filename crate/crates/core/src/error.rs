use thiserror::Error;

/// Errors raised by oracles, step engines and the solver driver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Caller violated an operation precondition (bad shape, non-positive step, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// An oracle produced NaN or an infinite smooth value.
    #[error("numerical domain error: {0}")]
    NumericalDomain(String),

    /// Consecutive iterates coincide to within the degeneracy threshold, so the
    /// secant curvature estimates are undefined.
    #[error("degenerate step: |dx| = {step_norm:e} is below threshold {threshold:e}")]
    DegenerateStep { step_norm: f64, threshold: f64 },

    /// A convex-only engine observed `<dg, dx> <= 0`.
    #[error("nonconvex curvature detected by convex-only engine: <dg, dx> = {inner:e}")]
    NonconvexDetected { inner: f64 },

    #[error("Armijo line search failed after {halvings} halvings")]
    LineSearchFailed { halvings: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
