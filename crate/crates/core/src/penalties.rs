//! Smooth convex penalties `J: R^n → R_+`.
//!
//! Every catalog entry is separable, vanishes at the origin and carries a
//! strong-convexity term, so the 2-convexity modulus `c*` is known in closed
//! form. Smoothness constants are certified analytically:
//!
//! | entry                 | `J(x)`                                      | `c*`  | `L`     | `L_H`          |
//! |-----------------------|---------------------------------------------|-------|---------|----------------|
//! | `quadratic`           | `½‖x‖²`                                     | `½`   | `1`     | `0`            |
//! | `pseudo-huber-strong` | `(μ/2)‖x‖² + Σ ε²(√(1+(x_i/ε)²) − 1)`       | `μ/2` | `μ + 1` | `0.85865…/ε`   |
//! | `quartic-strong`      | `(μ/2)‖x‖² + ¼Σ x_i⁴`                       | `μ/2` | unknown | `6R` on `‖x‖≤R`|

use serde::{Deserialize, Serialize};

use crate::bregman::Functional;
use crate::error::{Error, Result};
use crate::linalg::{check_dim, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum PenaltyCatalogEntry {
    Quadratic,
    PseudoHuberStrong { mu: f64, eps: f64 },
    /// `radius` is the ball on which the Hessian-Lipschitz bound is declared.
    QuarticStrong { mu: f64, radius: f64 },
}

impl PenaltyCatalogEntry {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Quadratic => "quadratic",
            Self::PseudoHuberStrong { .. } => "pseudo-huber-strong",
            Self::QuarticStrong { .. } => "quartic-strong",
        }
    }
}

/// A smoothness constant that may not exist globally.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constant {
    Known(f64),
    Unknown,
}

impl Constant {
    pub fn known(self) -> Option<f64> {
        match self {
            Self::Known(c) => Some(c),
            Self::Unknown => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Radius {
    Global,
    Ball(f64),
}

/// `max_t |3t(1+t²)^{-5/2}|`, attained at `t = ½`.
pub fn pseudo_huber_third_derivative_max() -> f64 {
    1.5 * 1.25f64.powf(-2.5)
}

/// Certified Hessian-Lipschitz constant of a catalog entry, globally or on
/// the ball `‖x‖ ≤ R`.
pub fn hessian_lipschitz_constant(entry: &PenaltyCatalogEntry, radius: Radius) -> Result<f64> {
    match *entry {
        PenaltyCatalogEntry::Quadratic => Ok(0.0),
        PenaltyCatalogEntry::PseudoHuberStrong { eps, .. } => {
            Ok(pseudo_huber_third_derivative_max() / eps)
        }
        PenaltyCatalogEntry::QuarticStrong { .. } => match radius {
            Radius::Global => Err(Error::NoGlobalHessianLipschitz("quartic-strong")),
            Radius::Ball(r) if r > 0.0 && r.is_finite() => Ok(6.0 * r),
            Radius::Ball(r) => Err(Error::InvalidParameter(format!(
                "radius must be positive, got {r}"
            ))),
        },
    }
}

/// A validated catalog penalty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Penalty {
    entry: PenaltyCatalogEntry,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

impl Penalty {
    pub fn new(entry: PenaltyCatalogEntry) -> Result<Self> {
        match entry {
            PenaltyCatalogEntry::Quadratic => {}
            PenaltyCatalogEntry::PseudoHuberStrong { mu, eps } => {
                positive("mu", mu)?;
                positive("eps", eps)?;
            }
            PenaltyCatalogEntry::QuarticStrong { mu, radius } => {
                positive("mu", mu)?;
                positive("radius", radius)?;
            }
        }
        Ok(Self { entry })
    }

    pub fn quadratic() -> Self {
        Self {
            entry: PenaltyCatalogEntry::Quadratic,
        }
    }

    pub fn pseudo_huber_strong(mu: f64, eps: f64) -> Result<Self> {
        Self::new(PenaltyCatalogEntry::PseudoHuberStrong { mu, eps })
    }

    pub fn quartic_strong(mu: f64, radius: f64) -> Result<Self> {
        Self::new(PenaltyCatalogEntry::QuarticStrong { mu, radius })
    }

    pub fn entry(&self) -> &PenaltyCatalogEntry {
        &self.entry
    }

    pub fn name(&self) -> &'static str {
        self.entry.name()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self.entry {
            PenaltyCatalogEntry::Quadratic => 0.5 * x.iter().map(|v| v * v).sum::<f64>(),
            PenaltyCatalogEntry::PseudoHuberStrong { mu, eps } => x
                .iter()
                .map(|&v| {
                    let t = v / eps;
                    // ε²(√(1+t²) − 1) without cancellation near 0
                    0.5 * mu * v * v + v * v / ((1.0 + t * t).sqrt() + 1.0)
                })
                .sum(),
            PenaltyCatalogEntry::QuarticStrong { mu, .. } => x
                .iter()
                .map(|&v| 0.5 * mu * v * v + 0.25 * v * v * v * v)
                .sum(),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vector {
        let g = match self.entry {
            PenaltyCatalogEntry::Quadratic => x.to_vec(),
            PenaltyCatalogEntry::PseudoHuberStrong { mu, eps } => x
                .iter()
                .map(|&v| {
                    let t = v / eps;
                    mu * v + v / (1.0 + t * t).sqrt()
                })
                .collect(),
            PenaltyCatalogEntry::QuarticStrong { mu, .. } => {
                x.iter().map(|&v| mu * v + v * v * v).collect()
            }
        };
        Vector::from_vec_unchecked(g)
    }

    /// `∇²J(x)·w`; all catalog entries are `C²`.
    pub fn hessian_vec(&self, x: &[f64], w: &[f64]) -> Result<Vector> {
        check_dim(x.len(), w.len())?;
        let diag = |i: usize| -> f64 {
            let v = x[i];
            match self.entry {
                PenaltyCatalogEntry::Quadratic => 1.0,
                PenaltyCatalogEntry::PseudoHuberStrong { mu, eps } => {
                    let t = v / eps;
                    mu + (1.0 + t * t).powf(-1.5)
                }
                PenaltyCatalogEntry::QuarticStrong { mu, .. } => mu + 3.0 * v * v,
            }
        };
        Ok(Vector::from_vec_unchecked(
            (0..x.len()).map(|i| diag(i) * w[i]).collect(),
        ))
    }

    pub fn smoothness_class(&self) -> u8 {
        2
    }

    /// Global Lipschitz constant of `∇J`.
    pub fn grad_lipschitz(&self) -> Constant {
        match self.entry {
            PenaltyCatalogEntry::Quadratic => Constant::Known(1.0),
            PenaltyCatalogEntry::PseudoHuberStrong { mu, .. } => Constant::Known(mu + 1.0),
            PenaltyCatalogEntry::QuarticStrong { .. } => Constant::Unknown,
        }
    }

    /// Hessian-Lipschitz constant; radius-qualified for `quartic-strong`.
    pub fn hessian_lipschitz(&self) -> Constant {
        let radius = match self.entry {
            PenaltyCatalogEntry::QuarticStrong { radius, .. } => Radius::Ball(radius),
            _ => Radius::Global,
        };
        match hessian_lipschitz_constant(&self.entry, radius) {
            Ok(c) => Constant::Known(c),
            Err(_) => Constant::Unknown,
        }
    }

    /// 2-convexity modulus `c*` with `D_J(u, v) ≥ c*‖u − v‖²`.
    pub fn convexity_modulus(&self) -> f64 {
        match self.entry {
            PenaltyCatalogEntry::Quadratic => 0.5,
            PenaltyCatalogEntry::PseudoHuberStrong { mu, .. }
            | PenaltyCatalogEntry::QuarticStrong { mu, .. } => 0.5 * mu,
        }
    }
}

impl Functional for Penalty {
    fn value(&self, x: &[f64]) -> f64 {
        Penalty::value(self, x)
    }

    fn gradient(&self, x: &[f64]) -> Vector {
        Penalty::gradient(self, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_value_and_gradient() {
        let q = Penalty::quadratic();
        assert_eq!(q.value(&[3.0, 4.0]), 12.5);
        assert_eq!(q.gradient(&[1.0, 2.0]).as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn catalog_vanishes_at_origin() {
        for p in [
            Penalty::quadratic(),
            Penalty::pseudo_huber_strong(1.0, 0.1).unwrap(),
            Penalty::quartic_strong(1.0, 2.0).unwrap(),
        ] {
            assert_eq!(p.value(&[0.0; 3]), 0.0);
            assert!(p.gradient(&[0.0; 3]).iter().all(|&g| g == 0.0));
        }
    }

    #[test]
    fn pseudo_huber_closed_forms() {
        let p = Penalty::pseudo_huber_strong(1.0, 1.0).unwrap();
        // 0.5 + (√2 − 1)
        let expected_value = 0.5 + (2f64.sqrt() - 1.0);
        assert!((p.value(&[1.0]) - expected_value).abs() < 1e-15);
        assert!((p.value(&[1.0]) - 0.914213).abs() < 1e-6);
        // μx + x/√(1+x²)
        let expected_grad = 1.0 + 1.0 / 2f64.sqrt();
        assert!((p.gradient(&[1.0])[0] - expected_grad).abs() < 1e-15);
        assert!((p.gradient(&[1.0])[0] - 1.707107).abs() < 1e-6);
    }

    #[test]
    fn hessian_lipschitz_catalog_values() {
        assert_eq!(
            hessian_lipschitz_constant(&PenaltyCatalogEntry::Quadratic, Radius::Global).unwrap(),
            0.0
        );
        let ph = PenaltyCatalogEntry::PseudoHuberStrong { mu: 1.0, eps: 1.0 };
        let lh = hessian_lipschitz_constant(&ph, Radius::Global).unwrap();
        assert!((lh - 0.858650).abs() < 1e-6, "{lh}");
        // dense sampling of |3t(1+t²)^{-5/2}| over [−10, 10]
        let sampled = (0..=2_000_000)
            .map(|k| -10.0 + 20.0 * k as f64 / 2_000_000.0)
            .map(|t: f64| (3.0 * t * (1.0 + t * t).powf(-2.5)).abs())
            .fold(0.0, f64::max);
        assert!(sampled <= lh * (1.0 + 1e-12) && lh - sampled < 1e-9);

        let q = PenaltyCatalogEntry::QuarticStrong { mu: 1.0, radius: 2.0 };
        assert!(matches!(
            hessian_lipschitz_constant(&q, Radius::Global),
            Err(Error::NoGlobalHessianLipschitz(_))
        ));
        assert_eq!(hessian_lipschitz_constant(&q, Radius::Ball(2.0)).unwrap(), 12.0);
        // |d³/dx³ ¼x⁴| = 6|x| sampled on [−2, 2]
        let sampled = (0..=4000)
            .map(|k| -2.0 + 4.0 * k as f64 / 4000.0)
            .map(|x: f64| (6.0 * x).abs())
            .fold(0.0, f64::max);
        assert!((sampled - 12.0).abs() < 1e-12);
    }

    #[test]
    fn scaled_pseudo_huber_constant() {
        let p = Penalty::pseudo_huber_strong(1.0, 0.1).unwrap();
        let lh = p.hessian_lipschitz().known().unwrap();
        assert!((lh - 8.58650).abs() < 1e-4);
        assert_eq!(p.grad_lipschitz(), Constant::Known(2.0));
        assert_eq!(p.convexity_modulus(), 0.5);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Penalty::pseudo_huber_strong(0.0, 0.1).is_err());
        assert!(Penalty::pseudo_huber_strong(1.0, -1.0).is_err());
        assert!(Penalty::quartic_strong(1.0, f64::INFINITY).is_err());
    }
}
