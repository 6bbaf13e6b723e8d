//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parameter `{0}` must be strictly positive and finite")]
    NonPositive(&'static str),
    #[error("ratio parameters must satisfy r12 >= r21")]
    RatioOrder,
    #[error("invalid ratio literal `{0}`: expected positive integers j/k")]
    InvalidRatio(String),
    #[error("stationary point z12* = {z12} outside [0, {m2}]: parameters outside the overload regime")]
    StationaryPointOutside { z12: f64, m2: f64 },
    #[error("scale index n = {0} yields an empty instance")]
    BadScaleIndex(u64),
}

#[derive(Debug, Error)]
pub enum QbdError {
    #[error("rate-matrix iteration did not converge within {max_iter} iterations (residual {residual:.3e})")]
    NonConverged { max_iter: u64, residual: f64 },
    #[error("boundary system alpha0 (B + R A2) = 0 is rank-deficient beyond tolerance (residual {residual:.3e})")]
    SingularBoundary { residual: f64 },
    #[error("drift test ({drift}) and mean-drift test ({mean_drift}) disagree: block assembly bug")]
    DriftTestMismatch { drift: bool, mean_drift: bool },
    #[error("state not in the positive recurrent set A (region {region})")]
    NotPositiveRecurrent { region: &'static str },
}

#[derive(Debug, Error)]
pub enum FluidError {
    #[error("Euler step at t = {t} leaves the state space by {overshoot:.3e}, more than h * rate bound = {allowed:.3e}")]
    StepTooLarge { t: f64, overshoot: f64, allowed: f64 },
    #[error(transparent)]
    Qbd(#[from] QbdError),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("illegal system state: {0}")]
    IllegalState(String),
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("ODE solution not in the set A near t = {t}")]
    NotInA { t: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Qbd(#[from] QbdError),
    #[error(transparent)]
    Fluid(#[from] FluidError),
    #[error(transparent)]
    Sim(#[from] SimError),
}
