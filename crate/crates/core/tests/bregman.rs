use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use varreg_core::bregman::{
    bregman, bregman_cost, bregman_misfit, bregman_sym, q_convexity_estimate, sym_identity_terms,
};
use varreg_core::experiments::verify::{catalog, random_vector};
use varreg_core::linalg::{distance, dot, sub};
use varreg_core::variational::{closed_form_tikhonov, solve};
use varreg_core::{Constant, CostFunctional, ForwardOperator, Penalty, SolveConfig, Vector};

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-3.0..3.0f64, 4),
        prop::collection::vec(-3.0..3.0f64, 4),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn divergences_are_nonnegative_and_vanish_on_the_diagonal((u, v) in pair()) {
        for p in catalog() {
            prop_assert!(bregman(&p, &u, &v).unwrap() >= -1e-12);
            prop_assert_eq!(bregman(&p, &u, &u).unwrap(), 0.0);
            prop_assert!(bregman_sym(&p, &u, &v).unwrap() >= -1e-12);
        }
    }

    #[test]
    fn symmetric_form_is_the_sum((u, v) in pair()) {
        for p in catalog() {
            let sum = bregman(&p, &u, &v).unwrap() + bregman(&p, &v, &u).unwrap();
            let sym = bregman_sym(&p, &u, &v).unwrap();
            prop_assert!((sum - sym).abs() <= 1e-10 * (1.0 + sym.abs()));
        }
    }

    #[test]
    fn quadratic_closed_forms((u, v) in pair()) {
        let q = Penalty::quadratic();
        let d2 = distance(&u, &v).powi(2);
        prop_assert!((bregman(&q, &u, &v).unwrap() - 0.5 * d2).abs() <= 1e-10);
        prop_assert!((bregman_sym(&q, &u, &v).unwrap() - d2).abs() <= 1e-10);
    }

    #[test]
    fn misfit_ignores_the_data((u, v) in pair(), data in prop::collection::vec(-10.0..10.0f64, 6)) {
        let op = ForwardOperator::random_dense(6, 4, 8).unwrap();
        let t = op.apply(&sub(&u, &v)).unwrap();
        let d = bregman_misfit(&op, &data, &u, &v).unwrap();
        prop_assert!((d - 0.5 * dot(&t, &t)).abs() <= 1e-10 * (1.0 + d));
    }

    #[test]
    fn taylor_upper_bound((u, v) in pair()) {
        // D_J(u, v) ≤ (L/2)‖u − v‖² for an L-smooth J
        for p in catalog() {
            let Constant::Known(l) = p.grad_lipschitz() else { continue };
            let d = bregman(&p, &u, &v).unwrap();
            prop_assert!(d <= 0.5 * l * distance(&u, &v).powi(2) * (1.0 + 1e-12) + 1e-14);
        }
    }
}

#[test]
fn cost_divergence_quadratic_closed_form() {
    let op = ForwardOperator::random_dense(5, 4, 21).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let data = random_vector(&mut rng, 5, 1.0);
    let alpha = 0.3;
    let f = CostFunctional::new(&op, &data, alpha, Penalty::quadratic()).unwrap();
    for _ in 0..20 {
        let u = random_vector(&mut rng, 4, 1.0);
        let v = random_vector(&mut rng, 4, 1.0);
        let t = op.apply(&sub(&u, &v)).unwrap();
        let oracle = 0.5 * dot(&t, &t) + alpha * 0.5 * distance(&u, &v).powi(2);
        assert!((bregman_cost(&f, &u, &v).unwrap() - oracle).abs() <= 1e-10);
    }
}

#[test]
fn cost_divergence_from_a_stationary_point() {
    let op = ForwardOperator::random_dense(6, 6, 5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let data = random_vector(&mut rng, 6, 1.0);
    let cfg = SolveConfig::default();
    for p in catalog() {
        let f = CostFunctional::new(&op, &data, 0.1, p).unwrap();
        let r = solve(&f, &cfg).unwrap();
        for _ in 0..10 {
            let u = random_vector(&mut rng, 6, 1.0);
            let d = bregman_cost(&f, &u, &r.minimizer).unwrap();
            assert!(d >= -cfg.grad_tol * distance(&u, &r.minimizer));
            let gap = f.cost_value(&u).unwrap() - r.objective;
            assert!((d - gap).abs() <= cfg.grad_tol * distance(&u, &r.minimizer) + 1e-12);
        }
    }
}

#[test]
fn strong_convexity_estimate_reaches_the_modulus() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for p in catalog() {
        // near-coincident pairs at the origin probe the curvature floor
        let pairs: Vec<(Vector, Vector)> = (0..200)
            .map(|_| (random_vector(&mut rng, 3, 1e-4), Vector::zeros(3)))
            .collect();
        let est = q_convexity_estimate(&p, &pairs).unwrap();
        assert!(est >= p.convexity_modulus() * (1.0 - 1e-9));
    }
}

/// Scalar problem `T = σ`, `J = ½x²`: `D_G^sym = σ²(φ_α − φ†)²` while
/// `α·D_J^sym = α(φ_α − φ†)²`, so the two agree only at `α = σ²`.
#[test]
fn symmetric_identity_holds_only_at_matching_curvature() {
    let sigma = 0.8;
    let op = ForwardOperator::diagonal(vec![sigma]).unwrap();
    let phi_true = [1.5];
    let data = [sigma * 1.5 + 0.01];
    for alpha in [0.05, sigma * sigma, 2.0] {
        let f = CostFunctional::new(&op, &data, alpha, Penalty::quadratic()).unwrap();
        let phi = closed_form_tikhonov(&op, &data, alpha).unwrap();
        let terms = sym_identity_terms(&f, &phi, &phi_true).unwrap();
        let e2 = (phi[0] - phi_true[0]).powi(2);
        assert!((terms.d_g_sym - sigma * sigma * e2).abs() <= 1e-14);
        assert!((terms.alpha_d_j_sym - alpha * e2).abs() <= 1e-14);
        if alpha == sigma * sigma {
            assert!(terms.residual <= 1e-12);
        } else {
            assert!(terms.residual > 1e-6);
        }
        assert!(terms.optimality_route_residual <= 1e-12);
    }
}

#[test]
fn optimality_route_holds_at_iterative_minimizers() {
    let op = ForwardOperator::random_dense(8, 6, 31).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let phi_true = random_vector(&mut rng, 6, 1.0);
    let mut data = op.apply(&phi_true).unwrap();
    let noise = random_vector(&mut rng, 8, 1e-2);
    data.iter_mut().zip(noise.iter()).for_each(|(d, n)| *d += n);
    for p in catalog() {
        let f = CostFunctional::new(&op, &data, 0.05, p).unwrap();
        let r = solve(&f, &SolveConfig::default()).unwrap();
        let terms = sym_identity_terms(&f, &r.minimizer, &phi_true).unwrap();
        assert!(terms.optimality_route_residual <= 1e-8, "{}: {terms:?}", p.name());
    }
}
