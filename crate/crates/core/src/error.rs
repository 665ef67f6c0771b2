use num_complex::Complex64;

/// Errors produced by the spectral-analysis routines.
#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("x = {x} lies outside the operator domain ({a}, {b})")]
    OutOfDomain { x: f64, a: f64, b: f64 },

    #[error(
        "adaptive stepper could not meet tol {tol:.3e} at x = {x} (step {step:.3e} below minimum)"
    )]
    ToleranceNotMet { x: f64, tol: f64, step: f64 },

    #[error("states disagree: positions {x1} vs {x2}, spectral parameters {z1} vs {z2}")]
    MismatchedStates {
        x1: f64,
        x2: f64,
        z1: Complex64,
        z2: Complex64,
    },

    #[error("truncated solution vanished at the regular endpoint (|u(a)| = {mag:.3e}); m is projectively infinite")]
    TruncationUnstable { mag: f64 },

    #[error("m-function requested on the real axis (z = {z}); boundary values are limits only")]
    RealAxis { z: Complex64 },

    #[error("Herglotz violation at {count} grid point(s), worst margin {worst_margin:.3e} at z = {worst_z}")]
    HerglotzViolation {
        count: usize,
        worst_z: Complex64,
        worst_margin: f64,
    },

    #[error("degenerate norm: ‖s‖ = 0 at x = {x} (only possible at the left endpoint)")]
    DegenerateNorm { x: f64 },

    #[error("eps = {eps:.3e} requires x beyond the configured maximum truncation {x_max}")]
    RangeExceeded { eps: f64, x_max: f64 },

    #[error("window [{lo}, {hi}] is not contained in the operator domain ({a}, {b})")]
    WindowOutOfDomain { lo: f64, hi: f64, a: f64, b: f64 },

    #[error("solution is not real-valued (max imaginary magnitude {imag:.3e}); the bound is stated for real solutions")]
    NonRealSolution { imag: f64 },

    #[error("λ − q₂ = {value:.6e} ≤ 0 at t = {t}; the Lyapunov function h is not positive there")]
    NonpositiveH { t: f64, value: f64 },

    #[error("t = {t} lies beyond the materialized tree truncation t_N = {t_max}")]
    BeyondTruncation { t: f64, t_max: f64 },

    #[error("invalid coefficient set: {0}")]
    InvalidCoefficients(String),

    #[error("invalid tree specification: {0}")]
    InvalidTree(String),

    #[error("expression error: {0}")]
    Expr(String),

    #[error("overflow: {0}")]
    Overflow(String),
}
