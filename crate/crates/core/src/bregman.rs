//! Bregman divergences `D_Φ(u, v) = Φ(u) − Φ(v) − ⟨∇Φ(v), u − v⟩` of the
//! penalty, the misfit and the full cost, plus their symmetric versions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, check_dim, Vector};
use crate::operators::ForwardOperator;
use crate::variational::{CostFunctional, Misfit, SolveResult};

/// A differentiable functional on `R^n`.
pub trait Functional {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vector;
}

/// Closure pair adapter, for ad-hoc functionals in tests and diagnostics.
pub struct FnFunctional<V, G> {
    pub value: V,
    pub gradient: G,
}

impl<V, G> Functional for FnFunctional<V, G>
where
    V: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vector,
{
    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &[f64]) -> Vector {
        (self.gradient)(x)
    }
}

pub fn bregman(phi: &impl Functional, u: &[f64], v: &[f64]) -> Result<f64> {
    check_dim(u.len(), v.len())?;
    let diff = linalg::sub(u, v);
    Ok(phi.value(u) - phi.value(v) - linalg::dot(&phi.gradient(v), &diff))
}

/// `D_Φ(u, v) + D_Φ(v, u)`, returned in its inner-product form
/// `⟨∇Φ(u) − ∇Φ(v), u − v⟩` after checking the two forms agree.
pub fn bregman_sym(phi: &impl Functional, u: &[f64], v: &[f64]) -> Result<f64> {
    let sum_form = bregman(phi, u, v)? + bregman(phi, v, u)?;
    let inner = linalg::dot(
        &linalg::sub(&phi.gradient(u), &phi.gradient(v)),
        &linalg::sub(u, v),
    );
    let scale = 1.0 + phi.value(u).abs() + phi.value(v).abs();
    let diff = (sum_form - inner).abs();
    if diff > 1e-9 * scale {
        return Err(Error::Inconsistent {
            what: "sum and inner-product forms of the symmetric Bregman divergence",
            diff,
        });
    }
    Ok(inner)
}

/// `D_G(u, v)` for `G = ½‖T· − f^δ‖²` from the three-term definition,
/// cross-checked against `½‖T(u − v)‖²`.
pub fn bregman_misfit(op: &ForwardOperator, data: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
    let g = Misfit::new(op, data)?;
    check_dim(op.domain_dim(), u.len())?;
    check_dim(op.domain_dim(), v.len())?;
    let three_term = bregman(&g, u, v)?;
    let tdiff = op.apply(&linalg::sub(u, v))?;
    let closed = 0.5 * linalg::dot(&tdiff, &tdiff);
    let scale = 1.0 + g.value(u) + g.value(v);
    let diff = (three_term - closed).abs();
    if diff > 1e-10 * scale {
        return Err(Error::Inconsistent {
            what: "three-term and closed-form misfit Bregman divergences",
            diff,
        });
    }
    Ok(three_term)
}

pub fn bregman_cost(f: &CostFunctional<'_>, u: &[f64], v: &[f64]) -> Result<f64> {
    check_dim(f.dim(), u.len())?;
    bregman(f, u, v)
}

/// Both sides of `α·D_J^sym(φ_α, φ†) = D_G^sym(φ_α, φ†)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymIdentityTerms {
    pub alpha_d_j_sym: f64,
    pub d_g_sym: f64,
    /// `|α·D_J^sym − D_G^sym| / (1 + |D_G^sym|)`
    pub residual: f64,
    /// The relation that stationarity of `φ_α` does imply:
    /// `α·D_J^sym = ⟨T*(f^δ − Tφ_α) − α∇J(φ†), φ_α − φ†⟩`, same normalization.
    pub optimality_route_residual: f64,
}

pub fn sym_identity_terms(
    f: &CostFunctional<'_>,
    phi_alpha: &[f64],
    phi_true: &[f64],
) -> Result<SymIdentityTerms> {
    check_dim(f.dim(), phi_alpha.len())?;
    check_dim(f.dim(), phi_true.len())?;
    let d_j_sym = bregman_sym(&f.penalty, phi_alpha, phi_true)?;
    let d_g_sym = bregman_sym(&f.misfit(), phi_alpha, phi_true)?;
    let alpha_d_j_sym = f.alpha * d_j_sym;
    let residual = (alpha_d_j_sym - d_g_sym).abs() / (1.0 + d_g_sym.abs());

    let diff = linalg::sub(phi_alpha, phi_true);
    let back = linalg::sub(f.data, &f.operator.apply(phi_alpha)?);
    let mut w = f.operator.apply_adjoint(&back)?;
    linalg::axpy(-f.alpha, &f.penalty.gradient(phi_true), &mut w);
    let rhs = linalg::dot(&w, &diff);
    let optimality_route_residual = (alpha_d_j_sym - rhs).abs() / (1.0 + rhs.abs());

    Ok(SymIdentityTerms {
        alpha_d_j_sym,
        d_g_sym,
        residual,
        optimality_route_residual,
    })
}

/// `|α·D_J^sym − D_G^sym| / (1 + |D_G^sym|)` at a computed minimizer.
pub fn sym_identity_check(
    f: &CostFunctional<'_>,
    phi_alpha: &SolveResult,
    phi_true: &[f64],
) -> Result<f64> {
    Ok(sym_identity_terms(f, &phi_alpha.minimizer, phi_true)?.residual)
}

/// `min D_Φ(u, v) / ‖u − v‖²` over the sample pairs with `u ≠ v`.
pub fn q_convexity_estimate(phi: &impl Functional, samples: &[(Vector, Vector)]) -> Result<f64> {
    let mut best: Option<f64> = None;
    for (u, v) in samples {
        check_dim(u.dim(), v.dim())?;
        let d2 = linalg::distance(u, v).powi(2);
        if d2 == 0.0 {
            continue;
        }
        let ratio = bregman(phi, u, v)? / d2;
        best = Some(best.map_or(ratio, |b: f64| b.min(ratio)));
    }
    best.map(|b| b.max(0.0)).ok_or(Error::NoSamples)
}

/// 2-convexity of the linear misfit: `D_G(u, v) = ½‖T(u − v)‖² ≥ ½σ_min²‖u − v‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MisfitConvexityEstimate {
    pub c_lower: f64,
    pub holds_2convex: bool,
}

impl MisfitConvexityEstimate {
    pub fn from_operator(op: &ForwardOperator) -> Self {
        let s = op.smallest_singular_value();
        let c_lower = 0.5 * s * s;
        Self {
            c_lower,
            holds_2convex: c_lower > 0.0,
        }
    }
}

/// Bregman diagnostics of a computed minimizer against the true solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BregmanReport {
    pub d_j: f64,
    pub d_j_sym: f64,
    pub d_g: f64,
    pub d_f: f64,
    #[serde(rename = "sym_residual")]
    pub sym_identity_residual: f64,
    pub optimality_route_residual: f64,
    pub alpha: f64,
}

impl BregmanReport {
    pub fn compute(f: &CostFunctional<'_>, phi_alpha: &[f64], phi_true: &[f64]) -> Result<Self> {
        let d_j = bregman(&f.penalty, phi_alpha, phi_true)?;
        let d_j_sym = bregman_sym(&f.penalty, phi_alpha, phi_true)?;
        let d_g = bregman_misfit(f.operator, f.data, phi_alpha, phi_true)?;
        let d_f = bregman_cost(f, phi_alpha, phi_true)?;
        let sym = sym_identity_terms(f, phi_alpha, phi_true)?;
        Ok(Self {
            d_j,
            d_j_sym,
            d_g,
            d_f,
            sym_identity_residual: sym.residual,
            optimality_route_residual: sym.optimality_route_residual,
            alpha: f.alpha,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::penalties::Penalty;

    #[test]
    fn quadratic_examples() {
        let q = Penalty::quadratic();
        assert_eq!(bregman(&q, &[1.0, 0.0], &[0.0, 0.0]).unwrap(), 0.5);
        assert_eq!(bregman(&q, &[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(bregman_sym(&q, &[1.0, 0.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(bregman_sym(&q, &[3.0, 2.0], &[3.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn pseudo_huber_examples() {
        let p = Penalty::pseudo_huber_strong(1.0, 1.0).unwrap();
        let d = bregman(&p, &[1.0], &[0.0]).unwrap();
        assert!((d - (0.5 + 2f64.sqrt() - 1.0)).abs() < 1e-15);
        let s = bregman_sym(&p, &[1.0], &[0.0]).unwrap();
        assert!((s - (1.0 + 1.0 / 2f64.sqrt())).abs() < 1e-15);
        assert!((s - 1.707107).abs() < 1e-6);
    }

    #[test]
    fn misfit_examples() {
        let id = ForwardOperator::identity(2).unwrap();
        assert_eq!(bregman_misfit(&id, &[5.0, -1.0], &[1.0, 0.0], &[0.0, 0.0]).unwrap(), 0.5);
        assert_eq!(bregman_misfit(&id, &[5.0, -1.0], &[1.0, 3.0], &[1.0, 3.0]).unwrap(), 0.0);
        let d = ForwardOperator::diagonal(vec![2.0, 1.0]).unwrap();
        for data in [[0.0, 0.0], [3.0, -7.0], [100.0, 1e-3]] {
            let v = bregman_misfit(&d, &data, &[1.5, 0.0], &[0.5, -1.0]).unwrap();
            assert!((v - 2.5).abs() < 1e-10, "{v}");
        }
    }

    #[test]
    fn inconsistent_symmetric_forms_are_reported() {
        // the two forms agree algebraically for any gradient; only a value
        // that changes between calls can split them
        let calls = std::cell::Cell::new(0u32);
        let drifting = FnFunctional {
            value: |x: &[f64]| {
                calls.set(calls.get() + 1);
                0.5 * linalg::dot(x, x) + calls.get() as f64
            },
            gradient: |x: &[f64]| Vector::new(x.to_vec()).unwrap(),
        };
        assert!(matches!(
            bregman_sym(&drifting, &[1.0], &[0.0]),
            Err(Error::Inconsistent { .. })
        ));
    }

    #[test]
    fn q_convexity_examples() {
        let q = Penalty::quadratic();
        let pairs = vec![
            (Vector::new(vec![1.0, 2.0]).unwrap(), Vector::new(vec![0.0, -1.0]).unwrap()),
            (Vector::new(vec![3.0, 0.0]).unwrap(), Vector::new(vec![3.0, 0.0]).unwrap()),
        ];
        assert!((q_convexity_estimate(&q, &pairs).unwrap() - 0.5).abs() < 1e-15);
        let same = vec![(Vector::zeros(2), Vector::zeros(2))];
        assert!(matches!(q_convexity_estimate(&q, &same), Err(Error::NoSamples)));

        // misfit with diag(2, 1): min over directions of ½‖Td‖²/‖d‖² is ½σ_min² = ½
        let d = ForwardOperator::diagonal(vec![2.0, 1.0]).unwrap();
        let data = [0.3, -0.2];
        let g = Misfit::new(&d, &data).unwrap();
        let pairs: Vec<_> = (0..=64)
            .map(|k| {
                let t = std::f64::consts::PI * k as f64 / 64.0;
                (Vector::new(vec![t.cos(), t.sin()]).unwrap(), Vector::zeros(2))
            })
            .collect();
        let est = q_convexity_estimate(&g, &pairs).unwrap();
        assert!((est - 0.5).abs() < 1e-12, "{est}");
        let m = MisfitConvexityEstimate::from_operator(&d);
        assert!((m.c_lower - 0.5).abs() < 1e-15 && m.holds_2convex);
    }
}
