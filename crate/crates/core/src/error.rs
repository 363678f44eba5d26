use thiserror::Error;

/// Errors produced by the spectral toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Lamé parameters (lambda = {lambda}, mu = {mu}): {reason}")]
    InvalidParameters {
        lambda: f64,
        mu: f64,
        reason: &'static str,
    },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("normal vector is not unit length (|n| = {norm})")]
    NonUnitNormal { norm: f64 },

    #[error("argument outside supported envelope: {0}")]
    Range(String),

    #[error("function evaluation produced a non-finite value at x = {abscissa}")]
    Evaluation { abscissa: f64 },

    #[error("argument outside the domain of definition: {0}")]
    Domain(String),

    #[error("expected a unique root in {interval:?}, found {found}")]
    RootUniqueness { interval: (f64, f64), found: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("resource budget exceeded: {required} modes requested, budget is {budget}")]
    Resource { required: u64, budget: u64 },

    #[error("spectrum is only certified complete up to {lambda_max}, requested {requested}")]
    Completeness { requested: f64, lambda_max: f64 },

    #[error("certification failed for {mode}: residual {residual:.3e}")]
    Certification { mode: String, residual: f64 },

    #[error("integrity check failed: {0}")]
    Integrity(String),

    #[error("insufficient range: {0}")]
    InsufficientRange(String),

    #[error("heat trace at t = {t} is tail-dominated (t * lambda_max = {product} < 20)")]
    TailDominated { t: f64, product: f64 },

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of certification or internal consistency, as opposed
    /// to bad input.
    pub fn is_integrity(&self) -> bool {
        matches!(
            self,
            Error::Certification { .. } | Error::Integrity(_) | Error::RootUniqueness { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
