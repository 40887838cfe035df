use thiserror::Error;

/// Errors raised across the solver, value and simulation layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("diffusion coefficient b must be positive, got b({z}) = {value}")]
    NonPositiveDiffusion { z: f64, value: f64 },

    #[error("transformed diffusion coefficient is not positive: sigma({x}) = {value}")]
    NonPositiveSigma { x: f64, value: f64 },

    #[error("invalid hidden-level law: {0}")]
    InvalidLaw(String),

    #[error("invalid cost function: {0}")]
    InvalidCost(String),

    #[error("quadrature on [{a}, {b}] did not reach tolerance (estimate {estimate}, error {error})")]
    QuadratureFailure {
        a: f64,
        b: f64,
        estimate: f64,
        error: f64,
    },

    #[error("degenerate interval [{a}, {b}]: scale difference below tolerance")]
    DegenerateInterval { a: f64, b: f64 },

    #[error("singular denominator at ({t}, {y}); use the inverse-equation stepper")]
    SingularDenominator { t: f64, y: f64 },

    #[error("ODE step size fell below minimum at t = {at} (step {step})")]
    StepFailure { at: f64, step: f64 },

    #[error("extremal limit for {curve} not converged: last sup-norm change {residual:e} after {sweeps} starts")]
    NotConverged {
        curve: String,
        residual: f64,
        sweeps: usize,
    },

    #[error("monotonicity violated: {0}")]
    MonotonicityViolation(String),

    #[error("point ({i}, {x}, {s}) is in region {found}, expected {expected}")]
    RegionMismatch {
        expected: &'static str,
        found: &'static str,
        i: f64,
        x: f64,
        s: f64,
    },

    #[error("no root of f* - g* inside the truncated domain: {0}")]
    NoRootInTruncation(String),

    #[error("unsupported cost: {0}")]
    UnsupportedCost(String),

    #[error("censoring rate {rate:.4} exceeds cap {cap:.4}; increase the horizon")]
    ExcessiveCensoring { rate: f64, cap: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
