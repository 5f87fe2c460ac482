use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::operators::ForwardOperator;
use crate::penalties::PenaltyCatalogEntry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionProfile {
    /// `φ†_i = 1/i` (1-based)
    Smooth,
    /// A Gaussian bump plus a plateau on the grid `t_i = (i + ½)/n`.
    Bump,
}

impl SolutionProfile {
    pub fn sample(&self, n: usize) -> Vec<f64> {
        match self {
            Self::Smooth => (1..=n).map(|i| 1.0 / i as f64).collect(),
            Self::Bump => (0..n)
                .map(|i| {
                    let t = (i as f64 + 0.5) / n as f64;
                    let bump = (-((t - 0.3) / 0.1).powi(2)).exp();
                    let plateau = if (0.55..=0.8).contains(&t) { 0.6 } else { 0.0 };
                    bump + plateau
                })
                .collect(),
        }
    }
}

/// How a problem instance was generated, echoed into reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "kebab-case")]
pub enum ProblemSpec {
    Diagonal {
        n: usize,
        decay: f64,
        profile: SolutionProfile,
    },
    Blur {
        n: usize,
        width: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub name: String,
    pub spec: ProblemSpec,
    pub operator: ForwardOperator,
    pub phi_true: Vector,
    /// `Tφ†`
    pub f_true: Vector,
    pub penalty: PenaltyCatalogEntry,
}

impl ProblemInstance {
    fn assemble(
        name: String,
        spec: ProblemSpec,
        operator: ForwardOperator,
        phi_true: Vec<f64>,
        penalty: PenaltyCatalogEntry,
    ) -> Result<Self> {
        let phi_true = Vector::new(phi_true)?;
        let f_true = operator.apply(&phi_true)?;
        Ok(Self {
            name,
            spec,
            operator,
            phi_true,
            f_true,
            penalty,
        })
    }
}

/// `T = diag(i^{−s})`, `i = 1..n`.
pub fn make_diagonal_problem(
    n: usize,
    decay: f64,
    profile: SolutionProfile,
    penalty: PenaltyCatalogEntry,
) -> Result<ProblemInstance> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    if !(decay >= 0.0 && decay.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "decay must be finite and nonnegative, got {decay}"
        )));
    }
    let sv = (1..=n).map(|i| (i as f64).powf(-decay)).collect();
    ProblemInstance::assemble(
        format!("diagonal(n={n}, s={decay})"),
        ProblemSpec::Diagonal { n, decay, profile },
        ForwardOperator::diagonal(sv)?,
        profile.sample(n),
        penalty,
    )
}

/// Normalized Gaussian kernel with standard deviation `width` samples,
/// truncated at `±⌈4·width⌉` (at least ±1, at most ±(n − 1)).
pub fn gaussian_kernel(width: f64, n: usize) -> Vec<f64> {
    let half = ((4.0 * width).ceil() as usize).clamp(1, n.saturating_sub(1).max(1));
    let raw: Vec<f64> = (0..=2 * half)
        .map(|k| {
            let j = k as f64 - half as f64;
            (-j * j / (2.0 * width * width)).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Zero-padded Gaussian blur on `n` samples with a [`SolutionProfile::Bump`] truth.
pub fn make_blur_problem(n: usize, width: f64, penalty: PenaltyCatalogEntry) -> Result<ProblemInstance> {
    if n < 8 {
        return Err(Error::InvalidParameter(format!("n must be at least 8, got {n}")));
    }
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "kernel width must be positive, got {width}"
        )));
    }
    ProblemInstance::assemble(
        format!("blur(n={n}, w={width})"),
        ProblemSpec::Blur { n, width },
        ForwardOperator::convolution(gaussian_kernel(width, n), n)?,
        SolutionProfile::Bump.sample(n),
        penalty,
    )
}
