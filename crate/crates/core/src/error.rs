use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite model evaluation at X={x}, Y={y}")]
    NonFinite { x: f64, y: f64 },

    #[error("state left the positive quadrant at t={t}")]
    LeftPositiveQuadrant { t: f64 },

    #[error("step size underflow at t={t}")]
    StepSizeUnderflow { t: f64 },

    #[error("maximum number of integration steps exceeded at t={t}")]
    TooManySteps { t: f64 },

    #[error("state is not an equilibrium (scaled residual {residual:e})")]
    NotEquilibrium { residual: f64 },

    #[error("rate {0} vanishes at the equilibrium")]
    ZeroRate(&'static str),

    #[error("power-law realization is singular (g_x + g_y - 1 = {0:e})")]
    Singular(f64),

    #[error("no cycle found: {0}")]
    NoCycleFound(String),

    #[error("not attracting / not converged: {0}")]
    NotConverged(String),

    #[error("growth rate S(gamma1) is not positive at t={t}")]
    NonPositiveGrowth { t: f64 },

    #[error("scale function {name} left the positive quadrant at t={t}")]
    ModuliExit { name: &'static str, t: f64 },

    #[error("truncation kappa={kappa} aliases on a grid of n={n} samples (need kappa < n/2)")]
    Aliasing { kappa: usize, n: usize },

    #[error("grid size {0} is not a power of two")]
    GridSize(usize),

    #[error("period mismatch: {0} vs {1}")]
    PeriodMismatch(f64, f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("correlation undefined: zero variance")]
    ZeroVariance,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
