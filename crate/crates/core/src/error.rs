use thiserror::Error;

/// Errors raised anywhere in the pipeline.
///
/// Scientific failures (a check that ran but did not pass) are reported
/// through report structs with `pass` flags, not through this type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("tabulated potential cannot be resampled: {0}")]
    Resample(String),

    #[error("integration failed at x = {x}: {reason}")]
    Integration { x: f64, reason: String },

    #[error("inconsistent integration: Wronskian spread {spread:e} exceeds {tol:e}")]
    InconsistentWronskian { spread: f64, tol: f64 },

    #[error("resonance detected: |W(ic)| = {magnitude:e}, the condition W(ic) ≠ 0 is violated")]
    Resonance { magnitude: f64 },

    #[error("eigenvalue scan window too small: sign change pending at kappa_max = {kappa_max}")]
    EnlargeWindow { kappa_max: f64 },

    #[error("diverging tail while normalizing kappa = {kappa}: {reason}")]
    DivergingTail { kappa: f64, reason: String },

    #[error("data quality: {0}")]
    DataQuality(String),

    #[error("ill-conditioned rational fit: condition number {cond:e}")]
    IllConditioned { cond: f64 },

    #[error("splitting quality: fitted slope {slope:.3} below required {required:.3}")]
    SplittingQuality { slope: f64, required: f64 },

    #[error("window too small: |G| = {edge:e} at the window edge")]
    WindowTooSmall { edge: f64 },

    #[error("regrid required: truncation {needed} exceeds available x-range {available}")]
    Regrid { needed: f64, available: f64 },

    #[error("pole hit at k = {0}")]
    Pole(String),

    #[error("jump verification failed: residual {residual:e} at k = {k}")]
    JumpVerification { residual: f64, k: f64 },

    #[error("reconstruction ladder did not converge: {0:?}")]
    Divergence(Vec<f64>),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("instability at t = {t}: {reason}")]
    Instability { t: f64, reason: String },

    #[error("schema mismatch: expected version {expected}, found {found}")]
    Schema { expected: u32, found: u32 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
