//! The Tikhonov-type cost `F_α(φ) = ½‖Tφ − f^δ‖² + α·J(φ)` and its minimization.
//!
//! [`solve`] runs Nesterov-accelerated gradient descent with an Armijo
//! backtracking line search and a monotone restart: whenever the
//! extrapolated step would increase the objective, momentum is reset and a
//! plain gradient step is taken from the current iterate. The stopping
//! certificate is the gradient norm, so the returned point is within
//! `grad_tol / m` of the minimizer for an `m`-strongly convex cost.

use serde::{Deserialize, Serialize};

use crate::bregman::Functional;
use crate::error::{Error, Result};
use crate::linalg::{self, check_dim, Vector};
use crate::operators::{ForwardOperator, OperatorKind};
use crate::penalties::Penalty;

/// The data misfit `G_δ(φ) = ½‖Tφ − f^δ‖²`.
#[derive(Debug, Clone, Copy)]
pub struct Misfit<'a> {
    pub operator: &'a ForwardOperator,
    pub data: &'a [f64],
}

impl<'a> Misfit<'a> {
    pub fn new(operator: &'a ForwardOperator, data: &'a [f64]) -> Result<Self> {
        check_dim(operator.range_dim(), data.len())?;
        Ok(Self { operator, data })
    }

    /// `Tφ − f^δ`
    pub fn residual(&self, x: &[f64]) -> Result<Vector> {
        let tx = self.operator.apply(x)?;
        Ok(linalg::sub(&tx, self.data))
    }
}

impl Functional for Misfit<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        let r = self.residual(x).expect("misfit evaluated at wrong dimension");
        0.5 * linalg::dot(&r, &r)
    }

    fn gradient(&self, x: &[f64]) -> Vector {
        let r = self.residual(x).expect("misfit evaluated at wrong dimension");
        self.operator
            .apply_adjoint(&r)
            .expect("residual has range dimension")
    }
}

/// `F_α(·, f^δ)` assembled from an operator, data, a penalty and `α ≥ 0`.
#[derive(Debug, Clone, Copy)]
pub struct CostFunctional<'a> {
    pub operator: &'a ForwardOperator,
    pub data: &'a [f64],
    pub alpha: f64,
    pub penalty: Penalty,
}

impl<'a> CostFunctional<'a> {
    pub fn new(
        operator: &'a ForwardOperator,
        data: &'a [f64],
        alpha: f64,
        penalty: Penalty,
    ) -> Result<Self> {
        check_dim(operator.range_dim(), data.len())?;
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be finite and nonnegative, got {alpha}"
            )));
        }
        Ok(Self {
            operator,
            data,
            alpha,
            penalty,
        })
    }

    pub fn misfit(&self) -> Misfit<'a> {
        Misfit {
            operator: self.operator,
            data: self.data,
        }
    }

    pub fn dim(&self) -> usize {
        self.operator.domain_dim()
    }

    pub fn cost_value(&self, x: &[f64]) -> Result<f64> {
        let r = self.misfit().residual(x)?;
        Ok(0.5 * linalg::dot(&r, &r) + self.alpha * self.penalty.value(x))
    }

    /// `T*(Tx − f^δ) + α∇J(x)`
    pub fn cost_gradient(&self, x: &[f64]) -> Result<Vector> {
        let r = self.misfit().residual(x)?;
        let mut g = self.operator.apply_adjoint(&r)?;
        linalg::axpy(self.alpha, &self.penalty.gradient(x), &mut g);
        Ok(g)
    }

    /// `‖T*(f^δ − Tφ) − α∇J(φ)‖`, the rearranged optimality condition,
    /// evaluated independently of [`Self::cost_gradient`].
    pub fn optimality_residual(&self, x: &[f64]) -> Result<f64> {
        let tx = self.operator.apply(x)?;
        let back = linalg::sub(self.data, &tx);
        let lhs = self.operator.apply_adjoint(&back)?;
        let grad_j = self.penalty.gradient(x);
        Ok(lhs
            .iter()
            .zip(grad_j.iter())
            .map(|(l, g)| {
                let d = l - self.alpha * g;
                d * d
            })
            .sum::<f64>()
            .sqrt())
    }
}

impl Functional for CostFunctional<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        self.cost_value(x).expect("cost evaluated at wrong dimension")
    }

    fn gradient(&self, x: &[f64]) -> Vector {
        self.cost_gradient(x).expect("cost evaluated at wrong dimension")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub grad_tol: f64,
    pub max_iter: usize,
    pub initial_step: f64,
    pub shrink: f64,
    pub sufficient_decrease: f64,
    /// Starting point; `None` means the origin.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub init: Option<Vector>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            grad_tol: 1e-9,
            max_iter: 50_000,
            initial_step: 1.0,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            init: None,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.grad_tol > 0.0) {
            return bad(format!("grad_tol must be positive, got {}", self.grad_tol));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad(format!("shrink must lie in (0, 1), got {}", self.shrink));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return bad(format!("initial_step must be positive, got {}", self.initial_step));
        }
        if !(self.sufficient_decrease > 0.0 && self.sufficient_decrease < 1.0) {
            return bad(format!(
                "sufficient_decrease must lie in (0, 1), got {}",
                self.sufficient_decrease
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub minimizer: Vector,
    pub iterations: usize,
    pub grad_norm: f64,
    pub optimality_residual: f64,
    pub objective: f64,
    pub converged: bool,
}

/// Minimizes `F` to `‖∇F‖ ≤ grad_tol`.
///
/// Running out of iterations is not an error: the best iterate is returned
/// with `converged = false`. A non-finite objective is.
pub fn solve(f: &CostFunctional<'_>, cfg: &SolveConfig) -> Result<SolveResult> {
    solve_with_trace(f, cfg, |_, _| {})
}

/// [`solve`], calling `trace(iteration, objective)` after every accepted step.
pub fn solve_with_trace(
    f: &CostFunctional<'_>,
    cfg: &SolveConfig,
    mut trace: impl FnMut(usize, f64),
) -> Result<SolveResult> {
    cfg.validate()?;
    let n = f.dim();
    let mut x = match &cfg.init {
        Some(v) => {
            check_dim(n, v.dim())?;
            v.clone()
        }
        None => Vector::zeros(n),
    };
    let c = cfg.sufficient_decrease;
    // tolerance for rounding in objective comparisons
    let slop = |v: f64| 8.0 * f64::EPSILON * v.abs().max(f64::MIN_POSITIVE);

    let mut fx = f.cost_value(&x)?;
    if !fx.is_finite() {
        return Err(Error::Diverged { iteration: 0 });
    }
    let mut gx = f.cost_gradient(&x)?;
    let mut y = x.clone();
    let mut gy = gx.clone();
    // whether y carries momentum, i.e. differs from x
    let mut extrapolated = false;
    let mut theta = 1.0_f64;
    let mut step = cfg.initial_step;
    trace(0, fx);

    for iter in 0..cfg.max_iter {
        let gnorm = linalg::norm(&gx);
        if gnorm <= cfg.grad_tol {
            let residual = f.optimality_residual(&x)?;
            if residual <= cfg.grad_tol {
                return Ok(SolveResult {
                    minimizer: x,
                    iterations: iter,
                    grad_norm: gnorm,
                    optimality_residual: residual,
                    objective: fx,
                    converged: true,
                });
            }
        }

        // Armijo backtracking from the extrapolated point, certified through
        // gradients: along the segment the directional derivative is monotone
        // for convex F, so ⟨∇F(cand), ∇F(y)⟩ ≥ c‖∇F(y)‖² implies
        // F(cand) ≤ F(y) − c·step·‖∇F(y)‖² without comparing objective values
        // that have already met rounding
        let gy_sq = linalg::dot(&gy, &gy);
        let (cand, fcand, gcand) = loop {
            let mut cand = y.clone();
            linalg::axpy(-step, &gy, &mut cand);
            let fc = f.cost_value(&cand)?;
            if fc.is_nan() {
                return Err(Error::Diverged { iteration: iter });
            }
            let gc = f.cost_gradient(&cand)?;
            if linalg::dot(&gc, &gy) >= c * gy_sq {
                break (cand, fc, gc);
            }
            step *= cfg.shrink;
            if step < f64::MIN_POSITIVE {
                return Err(Error::Diverged { iteration: iter });
            }
        };

        if extrapolated && fcand > fx + slop(fx) {
            // momentum overshoot: restart from x with a plain gradient step
            theta = 1.0;
            y = x.clone();
            gy = gx.clone();
            extrapolated = false;
            continue;
        }

        let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        let beta = (theta - 1.0) / theta_next;
        // gradient-based restart keeps the momentum aligned with descent
        let restart = linalg::dot(&gy, &linalg::sub(&cand, &x)) > 0.0;
        let mut y_next = cand.clone();
        if restart {
            theta = 1.0;
        } else {
            for i in 0..n {
                y_next[i] += beta * (cand[i] - x[i]);
            }
            theta = theta_next;
        }
        extrapolated = !restart && beta > 0.0;
        x = cand;
        fx = fcand;
        gx = gcand;
        if extrapolated {
            gy = f.cost_gradient(&y_next)?;
            if !gy.iter().all(|v| v.is_finite()) {
                return Err(Error::Diverged { iteration: iter });
            }
        } else {
            gy = gx.clone();
        }
        y = y_next;
        trace(iter + 1, fx);
    }

    let grad_norm = linalg::norm(&gx);
    let optimality_residual = f.optimality_residual(&x)?;
    let converged = grad_norm <= cfg.grad_tol && optimality_residual <= cfg.grad_tol;
    Ok(SolveResult {
        minimizer: x,
        iterations: cfg.max_iter,
        grad_norm,
        optimality_residual,
        objective: fx,
        converged,
    })
}

/// Minimizer of `½‖Tφ − f‖² + α·½‖φ‖²`, i.e. the solution of
/// `(T*T + αI)φ = T*f`, by direct elimination.
pub fn closed_form_tikhonov(op: &ForwardOperator, data: &[f64], alpha: f64) -> Result<Vector> {
    check_dim(op.range_dim(), data.len())?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    match op.kind() {
        OperatorKind::Diagonal { singular_values } => Ok(Vector::from_vec_unchecked(
            singular_values
                .iter()
                .zip(data)
                .map(|(s, f)| s * f / (s * s + alpha))
                .collect(),
        )),
        _ => {
            let n = op.domain_dim();
            if n > 512 {
                return Err(Error::InvalidParameter(format!(
                    "closed-form oracle limited to 512 unknowns, got {n}"
                )));
            }
            let mut normal = op.normal_matrix();
            for i in 0..n {
                normal[i * n + i] += alpha;
            }
            let rhs = op.apply_adjoint(data)?;
            Ok(Vector::from_vec_unchecked(linalg::cholesky_solve(
                &normal, n, &rhs,
            )?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_identity() -> ForwardOperator {
        ForwardOperator::identity(1).unwrap()
    }

    #[test]
    fn cost_value_examples() {
        let t = scalar_identity();
        let data = [0.0];
        let f = CostFunctional::new(&t, &data, 1.0, Penalty::quadratic()).unwrap();
        // ½·4 + 1·2
        assert_eq!(f.cost_value(&[2.0]).unwrap(), 4.0);
        assert_eq!(f.cost_value(&[0.0]).unwrap(), 0.0);

        let data = [3.0];
        let f0 = CostFunctional::new(&t, &data, 0.0, Penalty::quadratic()).unwrap();
        assert_eq!(f0.cost_value(&[1.0]).unwrap(), 2.0);
        assert!(f0.cost_gradient(&[3.0]).unwrap().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn cost_gradient_identity_quadratic() {
        let t = scalar_identity();
        let data = [0.0];
        let f = CostFunctional::new(&t, &data, 1.0, Penalty::quadratic()).unwrap();
        assert_eq!(f.cost_gradient(&[1.0]).unwrap().as_slice(), &[2.0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let t = ForwardOperator::identity(2).unwrap();
        assert!(CostFunctional::new(&t, &[1.0], 1.0, Penalty::quadratic()).is_err());
        assert!(CostFunctional::new(&t, &[1.0, 1.0], -1.0, Penalty::quadratic()).is_err());
        let data = [1.0, 1.0];
        let f = CostFunctional::new(&t, &data, 1.0, Penalty::quadratic()).unwrap();
        assert!(f.cost_value(&[1.0]).is_err());
        let cfg = SolveConfig {
            shrink: 1.5,
            ..SolveConfig::default()
        };
        assert!(solve(&f, &cfg).is_err());
    }

    #[test]
    fn closed_form_scalar_and_diagonal() {
        let t = scalar_identity();
        let phi = closed_form_tikhonov(&t, &[2.0], 1.0).unwrap();
        assert!((phi[0] - 1.0).abs() < 1e-15);
        let phi = closed_form_tikhonov(&t, &[2.0], 1e-12).unwrap();
        assert!((phi[0] - 2.0).abs() <= 1e-11);

        let d = ForwardOperator::diagonal(vec![2.0, 1.0]).unwrap();
        let phi = closed_form_tikhonov(&d, &[2.0, 1.0], 1.0).unwrap();
        assert!((phi[0] - 0.8).abs() < 1e-15);
        assert!((phi[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_data_gives_zero_minimizer() {
        let t = ForwardOperator::random_dense(6, 6, 3).unwrap();
        let data = [0.0; 6];
        for p in [
            Penalty::quadratic(),
            Penalty::pseudo_huber_strong(1.0, 0.1).unwrap(),
            Penalty::quartic_strong(1.0, 2.0).unwrap(),
        ] {
            let f = CostFunctional::new(&t, &data, 0.5, p).unwrap();
            let r = solve(&f, &SolveConfig::default()).unwrap();
            assert!(r.converged);
            assert!(r.minimizer.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn runs_out_of_iterations_without_error() {
        let t = ForwardOperator::diagonal(vec![1.0, 1e-3]).unwrap();
        let data = [1.0, 1.0];
        let f = CostFunctional::new(&t, &data, 1e-8, Penalty::quadratic()).unwrap();
        let cfg = SolveConfig {
            max_iter: 5,
            ..SolveConfig::default()
        };
        let r = solve(&f, &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 5);
        assert!(r.objective < f.cost_value(&[0.0, 0.0]).unwrap());
    }

    #[test]
    fn huge_alpha_shrinks_towards_origin() {
        let t = ForwardOperator::random_dense(5, 5, 11).unwrap();
        let data = [1.0, -2.0, 0.5, 3.0, -1.0];
        let mut last = f64::INFINITY;
        for alpha in [1.0, 1e3, 1e6, 1e12] {
            let f = CostFunctional::new(&t, &data, alpha, Penalty::pseudo_huber_strong(1.0, 0.1).unwrap())
                .unwrap();
            let r = solve(&f, &SolveConfig::default()).unwrap();
            assert!(r.converged, "alpha {alpha}: {r:?}");
            let nrm = linalg::norm(&r.minimizer);
            assert!(nrm <= last);
            last = nrm;
        }
        assert!(last <= 1e-6);
    }
}
