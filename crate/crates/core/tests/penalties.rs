use proptest::prelude::*;

use varreg_core::bregman::bregman;
use varreg_core::experiments::verify::catalog;
use varreg_core::linalg::{distance, dot, sub};
use varreg_core::{Constant, Penalty};

fn vec_pair(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-2.0..2.0f64, n),
        prop::collection::vec(-2.0..2.0f64, n),
    )
}

fn midpoint(u: &[f64], v: &[f64]) -> Vec<f64> {
    u.iter().zip(v).map(|(a, b)| 0.5 * (a + b)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gradient_matches_central_differences((x, d) in vec_pair(5)) {
        for p in catalog() {
            let h = 1e-6;
            let xp: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + h * b).collect();
            let xm: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a - h * b).collect();
            let fd = (p.value(&xp) - p.value(&xm)) / (2.0 * h);
            let an = dot(&p.gradient(&x), &d);
            prop_assert!((fd - an).abs() <= 1e-6 * (1.0 + an.abs()), "{}: {fd} vs {an}", p.name());
        }
    }

    #[test]
    fn gradients_are_monotone((u, v) in vec_pair(6)) {
        for p in catalog() {
            let m = dot(&sub(&p.gradient(&u), &p.gradient(&v)), &sub(&u, &v));
            // strongly monotone with modulus 2c*
            prop_assert!(m >= 2.0 * p.convexity_modulus() * distance(&u, &v).powi(2) * (1.0 - 1e-12) - 1e-15);
        }
    }

    #[test]
    fn midpoint_convexity((u, v) in vec_pair(4)) {
        for p in catalog() {
            let mid = p.value(&midpoint(&u, &v));
            prop_assert!(mid <= 0.5 * (p.value(&u) + p.value(&v)) + 1e-14);
        }
    }

    #[test]
    fn bregman_lower_bound_is_the_modulus((u, v) in vec_pair(4)) {
        for p in catalog() {
            let d = bregman(&p, &u, &v).unwrap();
            prop_assert!(d >= p.convexity_modulus() * distance(&u, &v).powi(2) - 1e-12);
        }
    }

    #[test]
    fn hessian_lipschitz_certificate((x, y) in vec_pair(5), w in prop::collection::vec(-1.0..1.0f64, 5)) {
        for p in catalog() {
            let Constant::Known(lh) = p.hessian_lipschitz() else { continue };
            let hx = p.hessian_vec(&x, &w).unwrap();
            let hy = p.hessian_vec(&y, &w).unwrap();
            let wn = dot(&w, &w).sqrt();
            // the quartic certificate only covers the ball of radius 2
            if p.name() == "quartic-strong" && (dot(&x, &x).sqrt() > 2.0 || dot(&y, &y).sqrt() > 2.0) {
                continue;
            }
            prop_assert!(distance(&hx, &hy) <= lh * distance(&x, &y) * wn * (1.0 + 1e-12) + 1e-15);
        }
    }

    #[test]
    fn gradient_lipschitz_certificate((u, v) in vec_pair(5)) {
        for p in catalog() {
            let Constant::Known(l) = p.grad_lipschitz() else { continue };
            prop_assert!(distance(&p.gradient(&u), &p.gradient(&v)) <= l * distance(&u, &v) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn pseudo_huber_is_nearly_linear_far_out() {
    // the non-quadratic part grows like ε|x|
    let p = Penalty::pseudo_huber_strong(1e-6, 0.1).unwrap();
    let big = p.value(&[100.0]);
    assert!((big - 0.1 * 100.0).abs() < 0.02, "{big}");
}
