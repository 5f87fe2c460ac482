//! Regularization-parameter rules, discrepancy-principle admissibility and
//! the inequality checks that hold at a computed minimizer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, check_dim};
use crate::operators::ForwardOperator;
use crate::penalties::{Constant, Penalty};
use crate::variational::{self, CostFunctional, SolveConfig, SolveResult};

fn require_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("δ must be positive, got {delta}")))
    }
}

/// `α(δ) = √δ·(τ + 1)·‖T*‖`
pub fn alpha_sqrt_rule(delta: f64, tau: f64, opnorm: f64) -> Result<f64> {
    require_delta(delta)?;
    if !(tau >= 1.0) {
        return Err(Error::InvalidParameter(format!("τ must be at least 1, got {tau}")));
    }
    if !(opnorm > 0.0) {
        return Err(Error::InvalidParameter(format!("‖T*‖ must be positive, got {opnorm}")));
    }
    Ok(delta.sqrt() * (tau + 1.0) * opnorm)
}

/// `α(δ) = δ^p`, `p ∈ (0, 2)`
pub fn alpha_power_rule(delta: f64, p: f64) -> Result<f64> {
    require_delta(delta)?;
    if !(p > 0.0 && p < 2.0) {
        return Err(Error::InvalidParameter(format!("p must lie in (0, 2), got {p}")));
    }
    Ok(delta.powf(p))
}

/// `τ(L_H) = (1 + ‖T*‖²/L_H)^{1/2}`
pub fn tau_of_hessian_lipschitz(lh: f64, opnorm: f64) -> Result<f64> {
    if lh == 0.0 {
        return Err(Error::HessianLipschitzZero);
    }
    if !(lh > 0.0) {
        return Err(Error::InvalidParameter(format!("L_H must be positive, got {lh}")));
    }
    Ok((1.0 + opnorm * opnorm / lh).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ParamRule {
    Sqrt { tau: f64, opnorm: f64 },
    Power { p: f64 },
    HessianSqrt { lh: f64, opnorm: f64 },
}

impl ParamRule {
    pub fn sqrt(tau: f64, opnorm: f64) -> Result<Self> {
        alpha_sqrt_rule(1.0, tau, opnorm)?;
        Ok(Self::Sqrt { tau, opnorm })
    }

    pub fn power(p: f64) -> Result<Self> {
        alpha_power_rule(1.0, p)?;
        Ok(Self::Power { p })
    }

    pub fn hessian_sqrt(lh: f64, opnorm: f64) -> Result<Self> {
        tau_of_hessian_lipschitz(lh, opnorm)?;
        Ok(Self::HessianSqrt { lh, opnorm })
    }

    pub fn alpha(&self, delta: f64) -> Result<f64> {
        match *self {
            Self::Sqrt { tau, opnorm } => alpha_sqrt_rule(delta, tau, opnorm),
            Self::Power { p } => alpha_power_rule(delta, p),
            Self::HessianSqrt { lh, opnorm } => {
                alpha_sqrt_rule(delta, tau_of_hessian_lipschitz(lh, opnorm)?, opnorm)
            }
        }
    }

    /// The discrepancy factor `τ` the rule is paired with; `None` for the
    /// power rule, which carries no `τ` of its own.
    pub fn tau(&self) -> Option<f64> {
        match *self {
            Self::Sqrt { tau, .. } => Some(tau),
            Self::Power { .. } => None,
            Self::HessianSqrt { lh, opnorm } => tau_of_hessian_lipschitz(lh, opnorm).ok(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityRecord {
    pub alpha: f64,
    pub discrepancy: f64,
    /// `τδ`
    pub bound: f64,
    /// Bound on how far the discrepancy of the computed point can sit from
    /// that of the exact minimizer.
    pub slack: f64,
    pub admissible: bool,
}

impl AdmissibilityRecord {
    pub fn new(alpha: f64, discrepancy: f64, tau: f64, delta: f64, slack: f64) -> Self {
        let bound = tau * delta;
        Self {
            alpha,
            discrepancy,
            bound,
            slack,
            admissible: discrepancy <= bound + slack,
        }
    }
}

/// `‖T(φ − φ*)‖ ≤ ‖T(T*T + αm I)^{-1}‖·‖∇F(φ)‖ ≤ ‖∇F(φ)‖ / (2√(αm))`
/// with `m = 2c*` the strong-convexity modulus of `J`.
fn discrepancy_slack(f: &CostFunctional<'_>, result: &SolveResult) -> f64 {
    let m = 2.0 * f.penalty.convexity_modulus() * f.alpha;
    if m > 0.0 {
        result.grad_norm / (2.0 * m.sqrt())
    } else {
        0.0
    }
}

pub fn discrepancy(op: &ForwardOperator, data: &[f64], x: &[f64]) -> Result<f64> {
    Ok(linalg::distance(&op.apply(x)?, data))
}

/// Compares `‖Tφ_α − f^δ‖` with `τδ`.
pub fn check_admissible(
    f: &CostFunctional<'_>,
    result: &SolveResult,
    tau: f64,
    delta: f64,
) -> Result<AdmissibilityRecord> {
    let disc = discrepancy(f.operator, f.data, &result.minimizer)?;
    Ok(AdmissibilityRecord::new(
        f.alpha,
        disc,
        tau,
        delta,
        discrepancy_slack(f, result),
    ))
}

/// Bisection on `log α` for the largest admissible `α` in a bracket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancySearch {
    pub tau: f64,
    pub delta: f64,
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    /// Stop once `ln(α_hi / α_lo) ≤ bisect_tol`.
    pub bisect_tol: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyOutcome {
    pub alpha: f64,
    pub record: AdmissibilityRecord,
    pub result: SolveResult,
    /// Every `(α, discrepancy)` evaluated, in evaluation order.
    pub evaluations: Vec<(f64, f64)>,
}

impl DiscrepancySearch {
    pub fn new(tau: f64, delta: f64, alpha_lo: f64, alpha_hi: f64) -> Self {
        Self {
            tau,
            delta,
            alpha_lo,
            alpha_hi,
            bisect_tol: 1e-3,
            max_steps: 40,
        }
    }

    pub fn run(
        &self,
        op: &ForwardOperator,
        data: &[f64],
        penalty: Penalty,
        cfg: &SolveConfig,
    ) -> Result<DiscrepancyOutcome> {
        require_delta(self.delta)?;
        if !(self.alpha_lo > 0.0 && self.alpha_lo < self.alpha_hi && self.alpha_hi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < α_lo < α_hi, got [{}, {}]",
                self.alpha_lo, self.alpha_hi
            )));
        }
        let mut evaluations = Vec::new();
        let mut eval = |alpha: f64| -> Result<(AdmissibilityRecord, SolveResult)> {
            let f = CostFunctional::new(op, data, alpha, penalty)?;
            let r = variational::solve(&f, cfg)?;
            if !r.converged {
                return Err(Error::NotConverged {
                    delta: self.delta,
                    grad_norm: r.grad_norm,
                    iterations: r.iterations,
                });
            }
            let rec = check_admissible(&f, &r, self.tau, self.delta)?;
            evaluations.push((alpha, rec.discrepancy));
            Ok((rec, r))
        };

        let (rec_hi, res_hi) = eval(self.alpha_hi)?;
        if rec_hi.admissible {
            return Ok(DiscrepancyOutcome {
                alpha: self.alpha_hi,
                record: rec_hi,
                result: res_hi,
                evaluations,
            });
        }
        let (rec_lo, res_lo) = eval(self.alpha_lo)?;
        if !rec_lo.admissible {
            return Err(Error::Bracket {
                alpha_lo: self.alpha_lo,
                alpha_hi: self.alpha_hi,
                disc_lo: rec_lo.discrepancy,
                disc_hi: rec_hi.discrepancy,
                target: self.tau * self.delta,
            });
        }

        let (mut lo, mut hi) = (self.alpha_lo, self.alpha_hi);
        let mut best = (rec_lo, res_lo);
        for _ in 0..self.max_steps {
            if (hi / lo).ln() <= self.bisect_tol {
                break;
            }
            let mid = (lo * hi).sqrt();
            let (rec, res) = eval(mid)?;
            if rec.admissible {
                lo = mid;
                best = (rec, res);
            } else {
                hi = mid;
            }
        }
        check_monotone(&evaluations)?;
        Ok(DiscrepancyOutcome {
            alpha: lo,
            record: best.0,
            result: best.1,
            evaluations,
        })
    }
}

fn check_monotone(evaluations: &[(f64, f64)]) -> Result<()> {
    let mut sorted = evaluations.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in sorted.windows(2) {
        let ((a0, d0), (a1, d1)) = (w[0], w[1]);
        if d0 > d1 * (1.0 + 1e-6) + 1e-12 {
            return Err(Error::NonMonotoneDiscrepancy {
                alpha_small: a0,
                disc_small: d0,
                alpha_large: a1,
                disc_large: d1,
            });
        }
    }
    Ok(())
}

/// Both sides of an inequality check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

fn noise_level(op: &ForwardOperator, data: &[f64], phi_true: &[f64], delta: f64) -> Result<f64> {
    let actual = discrepancy(op, data, phi_true)?;
    // exact-norm noise is only exact up to rounding at the scale of the data
    let rounding = 1e-15 * (1.0 + linalg::norm(data));
    if actual > delta * (1.0 + 1e-12) + rounding {
        return Err(Error::NoiseLevel {
            actual,
            declared: delta,
        });
    }
    Ok(actual)
}

/// `‖Tφ_α − f^δ‖ ≤ δ + ‖φ_α − φ†‖·‖T*‖`
pub fn residual_bound_check(
    op: &ForwardOperator,
    phi_alpha: &[f64],
    phi_true: &[f64],
    data: &[f64],
    delta: f64,
    opnorm: f64,
) -> Result<InequalityCheck> {
    noise_level(op, data, phi_true, delta)?;
    let lhs = discrepancy(op, data, phi_alpha)?;
    let rhs = delta + linalg::distance(phi_alpha, phi_true) * opnorm;
    Ok(InequalityCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-10,
    })
}

/// `α(J(φ_α) − J(φ†)) ≤ ½δ²` up to the solver slack `g·‖φ_α − φ†‖`, where
/// `g` is the gradient norm the solve reported. By convexity this bounds how
/// far `F(φ_α)` can sit above the exact minimum.
///
/// The slack trusts the certificate in `result`: recomputing the gradient
/// would make the inequality hold for every point.
pub fn weak_convergence_check(
    f: &CostFunctional<'_>,
    result: &SolveResult,
    phi_true: &[f64],
    delta: f64,
) -> Result<InequalityCheck> {
    let phi = &result.minimizer;
    check_dim(f.dim(), phi.len())?;
    check_dim(f.dim(), phi_true.len())?;
    let lhs = f.alpha * (f.penalty.value(phi) - f.penalty.value(phi_true));
    let rhs = 0.5 * delta * delta;
    let slack = result.grad_norm * linalg::distance(phi, phi_true)
        + 1e-12 * (rhs + f.alpha * f.penalty.value(phi_true));
    Ok(InequalityCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + slack,
    })
}

/// Hessian-Lipschitz constant of `F_α`: the misfit Hessian `T*T` is constant,
/// so only `α·L_H(J)` remains.
pub fn cost_hessian_lipschitz(f: &CostFunctional<'_>) -> Result<f64> {
    match f.penalty.hessian_lipschitz() {
        Constant::Known(lh) => Ok(f.alpha * lh),
        Constant::Unknown => Err(Error::NoGlobalHessianLipschitz(f.penalty.name())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HessianDiscrepancyReport {
    /// `‖Tφ_α − f^δ‖`
    pub lhs: f64,
    /// `τ(L_H)` at the Hessian-Lipschitz constant of `F_α`.
    pub tau: f64,
    /// `δ·τ(L_H)`
    pub main_term: f64,
    /// `√(2·L_H·‖φ_α − φ†‖²)`
    pub remainder: f64,
    /// `main_term + remainder − lhs`
    pub slack: f64,
    pub holds: bool,
}

/// `‖Tφ_α − f^δ‖ ≤ δ·τ(L_H) + √(Õ(‖φ_α − φ†‖²))` with the remainder taken
/// as `(L_H + L_H)‖φ_α − φ†‖²` for `L_H` the Hessian-Lipschitz constant of `F_α`.
pub fn hessian_discrepancy_diagnostic(
    f: &CostFunctional<'_>,
    result: &SolveResult,
    phi_true: &[f64],
    delta: f64,
    lh_of_cost: f64,
    opnorm: f64,
) -> Result<HessianDiscrepancyReport> {
    let tau = tau_of_hessian_lipschitz(lh_of_cost, opnorm)?;
    let phi = &result.minimizer;
    let lhs = discrepancy(f.operator, f.data, phi)?;
    let main_term = delta * tau;
    let dist = linalg::distance(phi, phi_true);
    let remainder = (2.0 * lh_of_cost * dist * dist).sqrt();
    let slack = main_term + remainder - lhs;
    Ok(HessianDiscrepancyReport {
        lhs,
        tau,
        main_term,
        remainder,
        slack,
        holds: slack >= 0.0,
    })
}

/// `D_J(φ_α, φ†) ≤ √δ·‖φ_α − φ†‖`, the penalty-Bregman bound paired with the
/// square-root rule on admissible rows.
pub fn bregman_bound_check(d_j: f64, error_norm: f64, delta: f64) -> InequalityCheck {
    let rhs = delta.sqrt() * error_norm;
    InequalityCheck {
        lhs: d_j,
        rhs,
        holds: d_j <= rhs * (1.0 + 1e-6),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_rule_examples() {
        assert!((alpha_sqrt_rule(0.04, 1.0, 1.0).unwrap() - 0.4).abs() < 1e-15);
        assert!((alpha_sqrt_rule(1.0, 3.0, 2.0).unwrap() - 8.0).abs() < 1e-15);
        assert!(alpha_sqrt_rule(0.04, 0.5, 1.0).is_err());
        let mut last = f64::INFINITY;
        for k in 0..12 {
            let a = alpha_sqrt_rule(10f64.powi(-k), 1.0, 1.0).unwrap();
            assert!(a < last);
            last = a;
        }
        assert!(last < 1e-5);
    }

    #[test]
    fn power_rule_examples() {
        assert!((alpha_power_rule(0.01, 1.0).unwrap() - 0.01).abs() < 1e-17);
        assert!((alpha_power_rule(0.01, 0.5).unwrap() - 0.1).abs() < 1e-15);
        for p in [0.1, 1.0, 1.9] {
            assert_eq!(alpha_power_rule(1.0, p).unwrap(), 1.0);
        }
        assert!(alpha_power_rule(0.1, 2.0).is_err());
        assert!(alpha_power_rule(0.1, 0.0).is_err());
        assert!(alpha_power_rule(0.0, 1.0).is_err());
    }

    #[test]
    fn tau_examples() {
        assert!((tau_of_hessian_lipschitz(1.0, 1.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((tau_of_hessian_lipschitz(3.0, 1.0).unwrap() - (4.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let t = tau_of_hessian_lipschitz(1e12, 1.0).unwrap();
        assert!(t >= 1.0 && t - 1.0 <= 1e-12);
        assert!(matches!(
            tau_of_hessian_lipschitz(0.0, 1.0),
            Err(Error::HessianLipschitzZero)
        ));
        let mut last = f64::INFINITY;
        for lh in [1e3, 1e6, 1e12] {
            let t = tau_of_hessian_lipschitz(lh, 1.0).unwrap();
            assert!(t >= 1.0 && t < last);
            last = t;
        }
    }

    #[test]
    fn admissibility_is_a_direct_comparison() {
        assert!(AdmissibilityRecord::new(1.0, 0.05, 1.0, 0.1, 0.0).admissible);
        assert!(!AdmissibilityRecord::new(1.0, 0.15, 1.0, 0.1, 0.0).admissible);
    }

    #[test]
    fn rules_increase_with_delta() {
        let rules = [
            ParamRule::sqrt(1.0, 1.0).unwrap(),
            ParamRule::power(0.7).unwrap(),
            ParamRule::hessian_sqrt(8.6, 1.0).unwrap(),
        ];
        for rule in rules {
            let alphas: Vec<f64> = (0..10)
                .map(|k| rule.alpha(10f64.powf(-0.5 * k as f64)).unwrap())
                .collect();
            assert!(alphas.windows(2).all(|w| w[1] < w[0]), "{rule:?}");
            assert!(*alphas.last().unwrap() < 0.05);
        }
        assert!(ParamRule::hessian_sqrt(0.0, 1.0).is_err());
    }
}
