//! Discretized linear forward operators `T: R^n → R^m` and their adjoints.
//!
//! All operators are immutable after construction. `apply` and
//! `apply_adjoint` are exact transposes of each other up to rounding,
//! which the property tests check on random probes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, check_dim, Vector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    /// `T = diag(σ)` with nonincreasing, strictly positive singular values.
    Diagonal { singular_values: Vec<f64> },
    /// Row-major `rows × cols` matrix.
    Dense {
        rows: usize,
        cols: usize,
        data: Vec<f64>,
    },
    /// Same-size discrete convolution with a centered odd-length kernel and
    /// zero padding: `(Tx)_i = Σ_j k[i − j + c] x_j`, `c = (len − 1) / 2`.
    Convolution { kernel: Vec<f64>, n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardOperator {
    kind: OperatorKind,
    domain_dim: usize,
    range_dim: usize,
}

/// Result of power iteration on `T*T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorNormEstimate {
    /// `√(vᵀT*Tv)` for the final unit iterate `v`.
    pub value: f64,
    pub iterations: usize,
    /// Difference between the last two successive estimates.
    pub residual: f64,
}

impl ForwardOperator {
    pub fn diagonal(singular_values: Vec<f64>) -> Result<Self> {
        if singular_values.is_empty() {
            return Err(Error::InvalidParameter("empty diagonal operator".into()));
        }
        if let Some(i) = singular_values
            .iter()
            .position(|s| !s.is_finite() || *s <= 0.0)
        {
            return Err(Error::InvalidParameter(format!(
                "singular value {i} is not strictly positive"
            )));
        }
        if singular_values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter(
                "singular values must be nonincreasing".into(),
            ));
        }
        let n = singular_values.len();
        Ok(Self {
            kind: OperatorKind::Diagonal { singular_values },
            domain_dim: n,
            range_dim: n,
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::diagonal(vec![1.0; n])
    }

    pub fn dense(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter("empty dense operator".into()));
        }
        check_dim(rows * cols, data.len())?;
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            kind: OperatorKind::Dense { rows, cols, data },
            domain_dim: cols,
            range_dim: rows,
        })
    }

    /// Dense matrix with i.i.d. standard normal entries from a seeded stream.
    pub fn random_dense(rows: usize, cols: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * cols)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        Self::dense(rows, cols, data)
    }

    pub fn convolution(kernel: Vec<f64>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("empty convolution domain".into()));
        }
        if kernel.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter(
                "convolution kernel must have odd length".into(),
            ));
        }
        if let Some(i) = kernel.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            kind: OperatorKind::Convolution { kernel, n },
            domain_dim: n,
            range_dim: n,
        })
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn domain_dim(&self) -> usize {
        self.domain_dim
    }

    pub fn range_dim(&self) -> usize {
        self.range_dim
    }

    /// `Tx`
    pub fn apply(&self, x: &[f64]) -> Result<Vector> {
        check_dim(self.domain_dim, x.len())?;
        let out = match &self.kind {
            OperatorKind::Diagonal { singular_values } => {
                singular_values.iter().zip(x).map(|(s, v)| s * v).collect()
            }
            OperatorKind::Dense { rows, cols, data } => (0..*rows)
                .map(|i| linalg::dot(&data[i * cols..(i + 1) * cols], x))
                .collect(),
            OperatorKind::Convolution { kernel, n } => {
                let c = (kernel.len() - 1) / 2;
                (0..*n)
                    .map(|i| {
                        // j ranges over i − j + c ∈ [0, len)
                        let j_lo = (i + c + 1).saturating_sub(kernel.len());
                        let j_hi = (i + c).min(n - 1);
                        (j_lo..=j_hi).map(|j| kernel[i + c - j] * x[j]).sum()
                    })
                    .collect()
            }
        };
        Ok(Vector::from_vec_unchecked(out))
    }

    /// `T*y`
    pub fn apply_adjoint(&self, y: &[f64]) -> Result<Vector> {
        check_dim(self.range_dim, y.len())?;
        let out = match &self.kind {
            OperatorKind::Diagonal { singular_values } => {
                singular_values.iter().zip(y).map(|(s, v)| s * v).collect()
            }
            OperatorKind::Dense { rows, cols, data } => {
                let mut out = vec![0.0; *cols];
                for i in 0..*rows {
                    linalg::axpy(y[i], &data[i * cols..(i + 1) * cols], &mut out);
                }
                out
            }
            OperatorKind::Convolution { kernel, n } => {
                let c = (kernel.len() - 1) / 2;
                // correlation: (T*y)_j = Σ_i k[i − j + c] y_i
                (0..*n)
                    .map(|j| {
                        let i_lo = j.saturating_sub(c);
                        let i_hi = (j + kernel.len() - 1 - c).min(n - 1);
                        (i_lo..=i_hi).map(|i| kernel[i + c - j] * y[i]).sum()
                    })
                    .collect()
            }
        };
        Ok(Vector::from_vec_unchecked(out))
    }

    /// `T*T x`
    pub fn apply_normal(&self, x: &[f64]) -> Result<Vector> {
        self.apply_adjoint(&self.apply(x)?)
    }

    /// Explicit row-major matrix of the operator, built column by column from `apply`.
    pub fn to_dense(&self) -> Vec<f64> {
        let (m, n) = (self.range_dim, self.domain_dim);
        let mut a = vec![0.0; m * n];
        for j in 0..n {
            let col = self
                .apply(&Vector::basis(n, j))
                .expect("basis vector has domain dimension");
            for i in 0..m {
                a[i * n + j] = col[i];
            }
        }
        a
    }

    /// Row-major `T*T`.
    pub fn normal_matrix(&self) -> Vec<f64> {
        let (m, n) = (self.range_dim, self.domain_dim);
        let a = self.to_dense();
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let s: f64 = (0..m).map(|k| a[k * n + i] * a[k * n + j]).sum();
                g[i * n + j] = s;
                g[j * n + i] = s;
            }
        }
        g
    }

    /// All singular values in decreasing order (Jacobi on `T*T` for
    /// non-diagonal kinds, so keep dimensions modest).
    pub fn singular_values(&self) -> Vec<f64> {
        match &self.kind {
            OperatorKind::Diagonal { singular_values } => singular_values.clone(),
            _ => linalg::symmetric_eigenvalues(&self.normal_matrix(), self.domain_dim)
                .into_iter()
                .map(|l| l.max(0.0).sqrt())
                .collect(),
        }
    }

    /// Smallest singular value `σ_min(T)`; zero when `T` has a null space.
    pub fn smallest_singular_value(&self) -> f64 {
        let sv = self.singular_values();
        if self.range_dim < self.domain_dim {
            return 0.0;
        }
        sv.last().copied().unwrap_or(0.0)
    }

    /// Estimates `‖T‖ = ‖T*‖` by power iteration on `T*T` from a seeded
    /// random start. Stops when successive estimates differ by at most `tol`.
    pub fn operator_norm(&self, tol: f64, max_iter: usize, seed: u64) -> Result<OperatorNormEstimate> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
        }
        let n = self.domain_dim;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let nv = linalg::norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);

        let mut prev = f64::INFINITY;
        let mut best = OperatorNormEstimate {
            value: 0.0,
            iterations: 0,
            residual: f64::INFINITY,
        };
        for it in 1..=max_iter {
            let w = self.apply_normal(&v)?;
            let rayleigh = linalg::dot(&v, &w).max(0.0);
            let value = rayleigh.sqrt();
            let residual = (value - prev).abs();
            best = OperatorNormEstimate {
                value,
                iterations: it,
                residual,
            };
            if residual <= tol {
                return Ok(best);
            }
            prev = value;
            let nw = linalg::norm(&w);
            if nw == 0.0 {
                // v lies in the null space of T*T; T vanishes on it
                return Ok(OperatorNormEstimate { residual: 0.0, ..best });
            }
            v = w.iter().map(|x| x / nw).collect();
        }
        Err(Error::NormNotConverged(best))
    }
}
