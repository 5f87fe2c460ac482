//! Invariant suites behind `varreg verify`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::problems::{make_diagonal_problem, SolutionProfile};
use super::study::{run_rate_study, StudyConfig};
use crate::bregman;
use crate::error::Result;
use crate::linalg::{self, Vector};
use crate::operators::ForwardOperator;
use crate::penalties::{Penalty, PenaltyCatalogEntry};
use crate::regparam::{self, ParamRule};
use crate::variational::{self, CostFunctional, SolveConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Bregman,
    Optimality,
    Lemmas,
}

impl Suite {
    pub const ALL: [Suite; 3] = [Suite::Bregman, Suite::Optimality, Suite::Lemmas];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Bregman => "bregman",
            Self::Optimality => "optimality",
            Self::Lemmas => "lemmas",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Reported, not judged.
    Info,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

impl CheckOutcome {
    fn judged(name: &str, ok: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            detail,
        }
    }

    fn info(name: &str, detail: String) -> Self {
        Self {
            name: name.to_string(),
            status: CheckStatus::Info,
            detail,
        }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Info => "INFO",
        };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

/// The penalties every suite sweeps, at the default experiment parameters.
pub fn catalog() -> Vec<Penalty> {
    vec![
        Penalty::quadratic(),
        Penalty::pseudo_huber_strong(1.0, 0.1).expect("valid parameters"),
        Penalty::quartic_strong(1.0, 2.0).expect("valid parameters"),
    ]
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vector {
    Vector::new((0..n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect())
        .expect("normal draws are finite")
}

pub fn run_suite(suite: Suite) -> Result<Vec<CheckOutcome>> {
    match suite {
        Suite::Bregman => bregman_suite(),
        Suite::Optimality => optimality_suite(),
        Suite::Lemmas => lemmas_suite(),
    }
}

fn bregman_suite() -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let q = Penalty::quadratic();
    let op = ForwardOperator::random_dense(7, 5, 3)?;
    let data = random_vector(&mut rng, 7, 1.0);
    let (mut e_dj, mut e_sym, mut e_dg) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let u = random_vector(&mut rng, 5, 2.0);
        let v = random_vector(&mut rng, 5, 2.0);
        let d2 = linalg::distance(&u, &v).powi(2);
        e_dj = e_dj.max((bregman::bregman(&q, &u, &v)? - 0.5 * d2).abs());
        e_sym = e_sym.max((bregman::bregman_sym(&q, &u, &v)? - d2).abs());
        let t = op.apply(&linalg::sub(&u, &v))?;
        e_dg = e_dg.max((bregman::bregman_misfit(&op, &data, &u, &v)? - 0.5 * linalg::dot(&t, &t)).abs());
    }
    let mut out = vec![CheckOutcome::judged(
        "closed forms",
        e_dj.max(e_sym).max(e_dg) <= 1e-10,
        format!("max errors D_J {e_dj:.2e}, D_J^sym {e_sym:.2e}, D_G {e_dg:.2e} over 100 pairs"),
    )];

    for p in catalog() {
        let c = p.convexity_modulus();
        let mut worst = f64::INFINITY;
        for _ in 0..100 {
            let u = random_vector(&mut rng, 6, 1.5);
            let v = random_vector(&mut rng, 6, 1.5);
            let d = bregman::bregman(&p, &u, &v)?;
            worst = worst.min(d - c * linalg::distance(&u, &v).powi(2));
        }
        out.push(CheckOutcome::judged(
            &format!("2-convexity of {}", p.name()),
            worst >= -1e-12,
            format!("min D_J − c*‖u−v‖² = {worst:.3e} with c* = {c}"),
        ));
    }

    // exact minimizer of a quadratic problem
    let diag = ForwardOperator::diagonal(vec![1.0, 0.7, 0.3, 0.1])?;
    let phi_true = Vector::new(vec![1.0, -0.5, 0.25, 2.0])?;
    let mut data = diag.apply(&phi_true)?;
    linalg::axpy(1.0, &random_vector(&mut rng, 4, 1e-2), &mut data);
    let alpha = 0.05;
    let f = CostFunctional::new(&diag, &data, alpha, q)?;
    let phi = variational::closed_form_tikhonov(&diag, &data, alpha)?;
    let terms = bregman::sym_identity_terms(&f, &phi, &phi_true)?;
    out.push(CheckOutcome::info(
        "αD_J^sym = D_G^sym at the closed-form minimizer",
        format!(
            "relative residual {:.3e} (αD_J^sym {:.6e}, D_G^sym {:.6e})",
            terms.residual, terms.alpha_d_j_sym, terms.d_g_sym
        ),
    ));
    out.push(CheckOutcome::judged(
        "αD_J^sym via optimality at the closed-form minimizer",
        terms.optimality_route_residual <= 1e-8,
        format!("relative residual {:.3e}", terms.optimality_route_residual),
    ));
    Ok(out)
}

fn optimality_suite() -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let cfg = SolveConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(23);

    let mut worst = 0.0f64;
    for k in 0..20u64 {
        let op = if k % 2 == 0 {
            let sv = (1..=8).map(|i| (i as f64).powf(-0.5)).collect();
            ForwardOperator::diagonal(sv)?
        } else {
            ForwardOperator::random_dense(8, 6, 100 + k)?
        };
        let data = random_vector(&mut rng, op.range_dim(), 1.0);
        let alpha = rng.gen_range(0.1..1.0);
        let f = CostFunctional::new(&op, &data, alpha, Penalty::quadratic())?;
        let r = variational::solve(&f, &cfg)?;
        let exact = variational::closed_form_tikhonov(&op, &data, alpha)?;
        worst = worst.max(linalg::distance(&r.minimizer, &exact));
    }
    out.push(CheckOutcome::judged(
        "solver agrees with closed-form Tikhonov",
        worst <= 1e-8,
        format!("max ‖Δ‖ = {worst:.3e} over 20 instances"),
    ));

    for p in catalog() {
        let mut worst = 0.0f64;
        let mut all_converged = true;
        for k in 0..5u64 {
            let op = ForwardOperator::random_dense(10, 8, 200 + k)?;
            let data = random_vector(&mut rng, 10, 1.0);
            let f = CostFunctional::new(&op, &data, 0.3, p)?;
            let r = variational::solve(&f, &cfg)?;
            all_converged &= r.converged;
            worst = worst.max(f.optimality_residual(&r.minimizer)?);
        }
        out.push(CheckOutcome::judged(
            &format!("first-order optimality with {}", p.name()),
            all_converged && worst <= 1e-9,
            format!("max ‖T*(f−Tφ) − α∇J(φ)‖ = {worst:.3e}"),
        ));
    }

    for p in catalog() {
        let h = 1e-6;
        let (mut fd_err, mut mono) = (0.0f64, f64::INFINITY);
        for _ in 0..100 {
            let x = random_vector(&mut rng, 6, 1.0);
            let y = random_vector(&mut rng, 6, 1.0);
            let d = random_vector(&mut rng, 6, 1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            linalg::axpy(h, &d, &mut xp);
            linalg::axpy(-h, &d, &mut xm);
            let fd = (p.value(&xp) - p.value(&xm)) / (2.0 * h);
            let an = linalg::dot(&p.gradient(&x), &d);
            fd_err = fd_err.max((fd - an).abs() / (1.0 + an.abs()));
            let g = linalg::sub(&p.gradient(&x), &p.gradient(&y));
            mono = mono.min(linalg::dot(&g, &linalg::sub(&x, &y)));
        }
        out.push(CheckOutcome::judged(
            &format!("gradient of {}", p.name()),
            fd_err <= 1e-6 && mono >= 0.0,
            format!("finite-difference error {fd_err:.2e}, min ⟨∇J(x)−∇J(y), x−y⟩ {mono:.3e}"),
        ));
    }
    Ok(out)
}

fn lemmas_suite() -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let table = [(1.0, 2f64.sqrt()), (3.0, 2.0 / 3f64.sqrt()), (1e12, 1.0)];
    let mut worst = 0.0f64;
    for (lh, expected) in table {
        worst = worst.max((regparam::tau_of_hessian_lipschitz(lh, 1.0)? - expected).abs());
    }
    out.push(CheckOutcome::judged(
        "τ(L_H) table",
        worst <= 1e-9,
        format!("max deviation {worst:.2e}"),
    ));

    let entry = PenaltyCatalogEntry::PseudoHuberStrong { mu: 1.0, eps: 0.1 };
    let problem = make_diagonal_problem(32, 1.0, SolutionProfile::Smooth, entry)?;
    let opnorm = super::study::estimate_opnorm(&problem)?;
    let mut cfg = StudyConfig::new(ParamRule::sqrt(1.0, opnorm)?);
    cfg.discrepancy_search = true;
    let study = run_rate_study(&problem, &cfg)?;
    let rows = &study.rows;
    let count = |pred: &dyn Fn(&super::StudyRow) -> bool| rows.iter().filter(|r| pred(r)).count();
    let residual_bad = count(&|r| !r.residual_bound.holds);
    let weak_bad = count(&|r| !r.weak_convergence.holds);
    out.push(CheckOutcome::judged(
        "residual bound on every row",
        residual_bad == 0,
        format!("{residual_bad} of {} rows violate", rows.len()),
    ));
    out.push(CheckOutcome::judged(
        "weak-convergence inequality on every row",
        weak_bad == 0,
        format!("{weak_bad} of {} rows violate", rows.len()),
    ));
    let hess_bad = count(&|r| r.admissible && r.hessian_discrepancy.is_none_or(|h| !h.holds));
    out.push(CheckOutcome::judged(
        "Hessian discrepancy bound on admissible rows",
        hess_bad == 0,
        format!("{hess_bad} admissible rows violate"),
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcome_display() {
        let c = CheckOutcome::judged("x", true, "fine".into());
        assert_eq!(c.to_string(), "[PASS] x: fine");
        assert_eq!(CheckOutcome::info("y", "z".into()).to_string(), "[INFO] y: z");
    }

    #[test]
    fn catalog_covers_every_entry() {
        let names: Vec<_> = catalog().iter().map(|p| p.name()).collect();
        assert_eq!(names, ["quadratic", "pseudo-huber-strong", "quartic-strong"]);
    }
}
