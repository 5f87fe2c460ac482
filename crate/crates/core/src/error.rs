use std::path::PathBuf;

use crate::operators::OperatorNormEstimate;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "power iteration did not converge in {} iterations (estimate {}, residual {:e})",
        .0.iterations, .0.value, .0.residual
    )]
    NormNotConverged(OperatorNormEstimate),

    #[error("Hessian Lipschitz constant is zero; the τ(L_H) formula is undefined, supply a fixed τ")]
    HessianLipschitzZero,

    #[error("{0} has no global Hessian Lipschitz constant; give a radius")]
    NoGlobalHessianLipschitz(&'static str),

    #[error("objective became non-finite at iteration {iteration}")]
    Diverged { iteration: usize },

    #[error("internal consistency check failed: {what} differ by {diff:e}")]
    Inconsistent { what: &'static str, diff: f64 },

    #[error("every sample pair had u = v")]
    NoSamples,

    #[error(
        "discrepancy bracket failed: ‖Tφ−f‖ = {disc_lo:e} at α_lo = {alpha_lo:e}, \
         {disc_hi:e} at α_hi = {alpha_hi:e}, target τδ = {target:e}"
    )]
    Bracket {
        alpha_lo: f64,
        alpha_hi: f64,
        disc_lo: f64,
        disc_hi: f64,
        target: f64,
    },

    #[error("discrepancy is not monotone in α: {disc_small:e} at α = {alpha_small:e} exceeds {disc_large:e} at α = {alpha_large:e}")]
    NonMonotoneDiscrepancy {
        alpha_small: f64,
        disc_small: f64,
        alpha_large: f64,
        disc_large: f64,
    },

    #[error("data inconsistent with declared noise level: ‖f^δ − Tφ†‖ = {actual:e} > δ = {declared:e}")]
    NoiseLevel { actual: f64, declared: f64 },

    #[error("solve did not converge at δ = {delta:e}: ‖∇F‖ = {grad_norm:e} after {iterations} iterations")]
    NotConverged {
        delta: f64,
        grad_norm: f64,
        iterations: usize,
    },

    #[error("slope fit needs at least 2 positive points, got {0}")]
    TooFewPoints(usize),

    #[error("invalid δ grid: {0}")]
    InvalidGrid(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
