use num_complex::Complex64;
use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// Every variant carries enough context to be reported on a single line
/// (see [`Error::kind`] for a stable machine-readable tag).
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("empty power series")]
    EmptySeries,

    #[error("base point mismatch: {left} vs {right}")]
    BaseMismatch { left: Complex64, right: Complex64 },

    #[error("matrix dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("reversion impossible: linear coefficient is {linear}")]
    ZeroLinearTerm { linear: Complex64 },

    #[error("reversion requires zero constant term, found {constant}")]
    NonZeroConstant { constant: Complex64 },

    #[error("fixed-point iteration did not converge (last iterate {last}, residual {residual:e})")]
    FixedPointNotFound { last: Complex64, residual: f64 },

    #[error("restrictive condition violated at multiplier {multiplier}: {reason}")]
    RestrictiveConditionViolated { multiplier: Complex64, reason: String },

    #[error("shift conjugation left sub-diagonal entry of relative size {deviation:e}")]
    ShiftInconsistent { deviation: f64 },

    #[error("matrix is not upper triangular (relative sub-diagonal size {deviation:e})")]
    NotUpperTriangular { deviation: f64 },

    #[error("resonant eigenvalues lambda^{j} and lambda^{k}")]
    ResonantEigenvalues { j: usize, k: usize },

    #[error("superattracting fixed point: |lambda| = {modulus:e}")]
    Superattracting { modulus: f64 },

    #[error("point {point} lies outside the chart (radius {radius})")]
    OutOfChart { point: Complex64, radius: f64 },

    #[error("series sum did not converge: last term {last_term:e} vs sum {sum:e}")]
    NonConvergent { last_term: f64, sum: f64 },

    #[error("orbit left the chart at step {step}")]
    OrbitEscaped { step: usize },

    #[error("vector field routes disagree by {deviation:e} (log branch mismatch?)")]
    BranchMismatch { deviation: f64 },

    #[error("trajectory left the chart at t = {t_reached}")]
    ChartEscape {
        t_reached: f64,
        partial: Vec<(f64, Complex64)>,
    },

    #[error("degenerate orbit: {0}")]
    DegenerateOrbit(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable snake_case tag for machine-readable reporting.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptySeries => "empty_series",
            Error::BaseMismatch { .. } => "base_mismatch",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::ZeroLinearTerm { .. } => "zero_linear_term",
            Error::NonZeroConstant { .. } => "nonzero_constant",
            Error::FixedPointNotFound { .. } => "fixed_point_not_found",
            Error::RestrictiveConditionViolated { .. } => "restrictive_condition_violated",
            Error::ShiftInconsistent { .. } => "shift_inconsistent",
            Error::NotUpperTriangular { .. } => "not_upper_triangular",
            Error::ResonantEigenvalues { .. } => "resonant_eigenvalues",
            Error::Superattracting { .. } => "superattracting",
            Error::OutOfChart { .. } => "out_of_chart",
            Error::NonConvergent { .. } => "non_convergent",
            Error::OrbitEscaped { .. } => "orbit_escaped",
            Error::BranchMismatch { .. } => "branch_mismatch",
            Error::ChartEscape { .. } => "chart_escape",
            Error::DegenerateOrbit(_) => "degenerate_orbit",
            Error::Domain(_) => "domain",
            Error::Parse(_) => "parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
