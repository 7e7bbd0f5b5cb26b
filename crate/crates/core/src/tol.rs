//! Numerical thresholds shared across the crate.

/// Default truncation order for series and matrix dimension.
pub const DEFAULT_ORDER: usize = 32;

/// Absolute residual accepted for `|f(x*) - x*|`.
pub const TOL_FIX: f64 = 1e-12;

/// Newton iteration cap for fixed points and local inverses.
pub const MAX_NEWTON: usize = 64;

/// Relative sub-diagonal size tolerated after shift conjugation.
pub const TOL_TRI: f64 = 1e-10;

/// Relative separation below which `lambda^j` and `lambda^k` count as equal.
pub const TOL_RES: f64 = 1e-8;

/// Relative size of the trailing term beyond which a truncated sum is
/// reported as non-convergent.
pub const TAIL_TOL: f64 = 1e-10;

/// Endpoint tolerance for the RK4 flow against the chart iterate.
pub const TOL_ODE: f64 = 1e-6;

/// Fraction of the distance to the nearest other fixed point used as the
/// default chart radius.
pub const RADIUS_FRACTION: f64 = 0.1;
