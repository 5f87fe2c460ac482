use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::noise::{inject_noise, NoiseModel};
use super::problems::{ProblemInstance, ProblemSpec};
use super::slope::fit_loglog_slope;
use crate::bregman::BregmanReport;
use crate::error::{Error, Result};
use crate::linalg::{self, Vector};
use crate::penalties::{Penalty, PenaltyCatalogEntry};
use crate::regparam::{
    self, AdmissibilityRecord, DiscrepancySearch, HessianDiscrepancyReport, InequalityCheck,
    ParamRule,
};
use crate::variational::{self, CostFunctional, SolveConfig, SolveResult};

pub const DEFAULT_DELTAS: [f64; 7] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4];

/// Seed offset between noise repeats of the same row.
const REPEAT_STRIDE: u64 = 1_000_003;
/// Fallback bracket: step `α` down by this factor until admissible.
const BRACKET_FACTOR: f64 = 0.1;
const BRACKET_STEPS: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub rule: ParamRule,
    /// Strictly decreasing, positive, at least four entries.
    pub deltas: Vec<f64>,
    pub solve: SolveConfig,
    pub seed: u64,
    pub repeats: usize,
    /// Replace an inadmissible rule `α` by the largest admissible one.
    pub discrepancy_search: bool,
    /// Discrepancy factor for rules without their own `τ`.
    pub tau: f64,
    pub bisect_tol: f64,
}

impl StudyConfig {
    pub fn new(rule: ParamRule) -> Self {
        Self {
            rule,
            deltas: DEFAULT_DELTAS.to_vec(),
            solve: SolveConfig::default(),
            seed: 0,
            repeats: 1,
            discrepancy_search: false,
            tau: 1.0,
            bisect_tol: 1e-3,
        }
    }

    /// `τ` used for admissibility: the rule's own, else [`Self::tau`].
    pub fn discrepancy_tau(&self) -> f64 {
        self.rule.tau().unwrap_or(self.tau)
    }

    fn validate(&self) -> Result<()> {
        let d = &self.deltas;
        if d.len() < 4 {
            return Err(Error::InvalidGrid(format!("need at least 4 noise levels, got {}", d.len())));
        }
        if let Some(bad) = d.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidGrid(format!("noise levels must be positive, got {bad}")));
        }
        if d.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidGrid("noise levels must be strictly decreasing".into()));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidParameter("repeats must be at least 1".into()));
        }
        if !(self.tau >= 1.0) {
            return Err(Error::InvalidParameter(format!("τ must be at least 1, got {}", self.tau)));
        }
        if !(self.bisect_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bisect_tol must be positive, got {}",
                self.bisect_tol
            )));
        }
        self.solve.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaSource {
    Rule,
    DiscrepancySearch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub delta: f64,
    pub alpha: f64,
    pub admissible: bool,
    pub discrepancy: f64,
    pub error_norm: f64,
    pub d_j: f64,
    pub d_j_sym: f64,
    pub d_g: f64,
    pub d_f: f64,
    pub sym_residual: f64,
    pub rule_alpha: f64,
    pub rule_admissible: bool,
    pub alpha_source: AlphaSource,
    pub optimality_residual: f64,
    pub optimality_route_residual: f64,
    pub iterations: usize,
    pub d_f_vanishes: bool,
    pub residual_bound: InequalityCheck,
    pub weak_convergence: InequalityCheck,
    /// Only for penalties with a known, nonzero Hessian-Lipschitz constant.
    pub hessian_discrepancy: Option<HessianDiscrepancyReport>,
    /// Only on admissible rows using a square-root rule `α`.
    pub bregman_bound: Option<InequalityCheck>,
}

/// Least-squares log-log slopes; `None` when fewer than two usable rows.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FittedSlopes {
    pub error_vs_delta: Option<f64>,
    pub d_j_vs_delta: Option<f64>,
    pub d_g_vs_delta: Option<f64>,
}

impl FittedSlopes {
    pub fn fit<'a>(rows: impl IntoIterator<Item = &'a StudyRow> + Clone) -> Self {
        let slope = |key: fn(&StudyRow) -> f64| {
            let pts: Vec<(f64, f64)> = rows.clone().into_iter().map(|r| (r.delta, key(r))).collect();
            fit_loglog_slope(&pts).ok()
        };
        Self {
            error_vs_delta: slope(|r| r.error_norm),
            d_j_vs_delta: slope(|r| r.d_j),
            d_g_vs_delta: slope(|r| r.d_g),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyEcho {
    pub problem: String,
    pub spec: ProblemSpec,
    pub penalty: PenaltyCatalogEntry,
    pub opnorm: f64,
    pub config: StudyConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateStudyResult {
    pub rows: Vec<StudyRow>,
    pub fitted_slopes: FittedSlopes,
    /// Same fit restricted to admissible rows.
    pub admissible_slopes: FittedSlopes,
    pub config: StudyEcho,
}

impl RateStudyResult {
    pub fn from_rows(rows: Vec<StudyRow>, config: StudyEcho) -> Self {
        let fitted_slopes = FittedSlopes::fit(rows.iter());
        let admissible_slopes = FittedSlopes::fit(rows.iter().filter(|r| r.admissible));
        Self {
            rows,
            fitted_slopes,
            admissible_slopes,
            config,
        }
    }
}

/// `‖T*‖` by power iteration, to the accuracy the studies rely on.
pub fn estimate_opnorm(problem: &ProblemInstance) -> Result<f64> {
    Ok(problem.operator.operator_norm(1e-13, 200_000, 0)?.value)
}

pub fn run_rate_study(problem: &ProblemInstance, cfg: &StudyConfig) -> Result<RateStudyResult> {
    cfg.validate()?;
    let penalty = Penalty::new(problem.penalty)?;
    let opnorm = estimate_opnorm(problem)?;
    let ctx = RowContext {
        problem,
        cfg,
        penalty,
        opnorm,
        tau: cfg.discrepancy_tau(),
    };
    let rows = cfg
        .deltas
        .par_iter()
        .enumerate()
        .map(|(i, &delta)| ctx.row(i as u64, delta))
        .collect::<Result<Vec<_>>>()?;
    let echo = StudyEcho {
        problem: problem.name.clone(),
        spec: problem.spec,
        penalty: problem.penalty,
        opnorm,
        config: cfg.clone(),
    };
    Ok(RateStudyResult::from_rows(rows, echo))
}

struct RowContext<'a> {
    problem: &'a ProblemInstance,
    cfg: &'a StudyConfig,
    penalty: Penalty,
    opnorm: f64,
    tau: f64,
}

/// One noise realization at one `δ`.
struct Sample {
    row: StudyRow,
    report: BregmanReport,
}

impl RowContext<'_> {
    fn row(&self, index: u64, delta: f64) -> Result<StudyRow> {
        let base = self.cfg.seed.wrapping_add(index);
        let mut samples = (0..self.cfg.repeats as u64)
            .map(|r| self.sample(delta, base.wrapping_add(REPEAT_STRIDE.wrapping_mul(r))))
            .collect::<Result<Vec<_>>>()?;
        if samples.len() == 1 {
            return Ok(samples.pop().unwrap().row);
        }
        let mean = |key: fn(&Sample) -> f64| average_logs(samples.iter().map(key));
        let mut row = samples[0].row.clone();
        row.error_norm = mean(|s| s.row.error_norm);
        row.d_j = mean(|s| s.report.d_j);
        row.d_j_sym = mean(|s| s.report.d_j_sym);
        row.d_g = mean(|s| s.report.d_g);
        row.d_f = mean(|s| s.report.d_f);
        let max = |key: fn(&Sample) -> f64| samples.iter().map(key).fold(0.0, f64::max);
        row.sym_residual = max(|s| s.row.sym_residual);
        row.optimality_residual = max(|s| s.row.optimality_residual);
        row.optimality_route_residual = max(|s| s.row.optimality_route_residual);
        row.iterations = samples.iter().map(|s| s.row.iterations).max().unwrap_or(0);
        row.d_f_vanishes = samples.iter().all(|s| s.row.d_f_vanishes);
        row.residual_bound = tightest(samples.iter().map(|s| s.row.residual_bound));
        row.weak_convergence = tightest(samples.iter().map(|s| s.row.weak_convergence));
        Ok(row)
    }

    fn solve_at(&self, data: &[f64], alpha: f64, delta: f64) -> Result<SolveResult> {
        let f = CostFunctional::new(&self.problem.operator, data, alpha, self.penalty)?;
        let r = variational::solve(&f, &self.cfg.solve)?;
        if !r.converged {
            return Err(Error::NotConverged {
                delta,
                grad_norm: r.grad_norm,
                iterations: r.iterations,
            });
        }
        Ok(r)
    }

    fn admissibility(&self, data: &[f64], alpha: f64, delta: f64) -> Result<(AdmissibilityRecord, SolveResult)> {
        let r = self.solve_at(data, alpha, delta)?;
        let f = CostFunctional::new(&self.problem.operator, data, alpha, self.penalty)?;
        Ok((regparam::check_admissible(&f, &r, self.tau, delta)?, r))
    }

    fn sample(&self, delta: f64, seed: u64) -> Result<Sample> {
        let p = self.problem;
        let data = inject_noise(&p.f_true, &NoiseModel { delta, seed })?;
        let rule_alpha = self.cfg.rule.alpha(delta)?;
        let (rule_rec, rule_res) = self.admissibility(&data, rule_alpha, delta)?;

        let (source, record, result) = if rule_rec.admissible || !self.cfg.discrepancy_search {
            (AlphaSource::Rule, rule_rec, rule_res)
        } else {
            let (lo, hi) = self.bracket(&data, rule_alpha, delta)?;
            let mut search = DiscrepancySearch::new(self.tau, delta, lo, hi);
            search.bisect_tol = self.cfg.bisect_tol;
            let out = search.run(&p.operator, &data, self.penalty, &self.cfg.solve)?;
            (AlphaSource::DiscrepancySearch, out.record, out.result)
        };

        let alpha = record.alpha;
        let f = CostFunctional::new(&p.operator, &data, alpha, self.penalty)?;
        let phi = &result.minimizer;
        let report = BregmanReport::compute(&f, phi, &p.phi_true)?;
        let error_norm = linalg::distance(phi, &p.phi_true);
        let residual_bound =
            regparam::residual_bound_check(&p.operator, phi, &p.phi_true, &data, delta, self.opnorm)?;
        let weak_convergence = regparam::weak_convergence_check(&f, &result, &p.phi_true, delta)?;
        let hessian_discrepancy = match regparam::cost_hessian_lipschitz(&f) {
            Ok(lh) if lh > 0.0 => Some(regparam::hessian_discrepancy_diagnostic(
                &f,
                &result,
                &p.phi_true,
                delta,
                lh,
                self.opnorm,
            )?),
            _ => None,
        };
        let sqrt_rule = matches!(self.cfg.rule, ParamRule::Sqrt { .. } | ParamRule::HessianSqrt { .. });
        let bregman_bound = (record.admissible && sqrt_rule && source == AlphaSource::Rule)
            .then(|| regparam::bregman_bound_check(report.d_j, error_norm, delta));
        let d_f_vanishes = report.d_f.abs() <= 1e-12 * (1.0 + f.cost_value(phi)?.abs());

        let row = StudyRow {
            delta,
            alpha,
            admissible: record.admissible,
            discrepancy: record.discrepancy,
            error_norm,
            d_j: report.d_j,
            d_j_sym: report.d_j_sym,
            d_g: report.d_g,
            d_f: report.d_f,
            sym_residual: report.sym_identity_residual,
            rule_alpha,
            rule_admissible: rule_rec.admissible,
            alpha_source: source,
            optimality_residual: result.optimality_residual,
            optimality_route_residual: report.optimality_route_residual,
            iterations: result.iterations,
            d_f_vanishes,
            residual_bound,
            weak_convergence,
            hessian_discrepancy,
            bregman_bound,
        };
        Ok(Sample { row, report })
    }

    /// `(α_lo, α_hi)` with `α_lo` admissible and `α_hi = α_lo / factor` not.
    fn bracket(&self, data: &[f64], rule_alpha: f64, delta: f64) -> Result<(f64, f64)> {
        let mut hi = rule_alpha;
        let mut last_disc = f64::NAN;
        for _ in 0..BRACKET_STEPS {
            let lo = hi * BRACKET_FACTOR;
            let (rec, _) = self.admissibility(data, lo, delta)?;
            if rec.admissible {
                return Ok((lo, hi));
            }
            last_disc = rec.discrepancy;
            hi = lo;
        }
        Err(Error::Bracket {
            alpha_lo: hi,
            alpha_hi: rule_alpha,
            disc_lo: last_disc,
            disc_hi: f64::NAN,
            target: self.tau * delta,
        })
    }
}

/// Geometric mean when every value is positive, arithmetic mean otherwise.
fn average_logs(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count() as f64;
    if values.clone().all(|v| v > 0.0) {
        (values.map(f64::ln).sum::<f64>() / n).exp()
    } else {
        values.sum::<f64>() / n
    }
}

/// The check with the smallest margin `rhs − lhs`.
fn tightest(checks: impl Iterator<Item = InequalityCheck>) -> InequalityCheck {
    checks
        .min_by(|a, b| (a.rhs - a.lhs).total_cmp(&(b.rhs - b.lhs)))
        .expect("at least one repeat")
}

/// Noisy data of row `index`, noise repeat `repeat`.
pub fn row_data(problem: &ProblemInstance, cfg: &StudyConfig, index: usize, repeat: usize) -> Result<Vector> {
    let seed = cfg
        .seed
        .wrapping_add(index as u64)
        .wrapping_add(REPEAT_STRIDE.wrapping_mul(repeat as u64));
    inject_noise(
        &problem.f_true,
        &NoiseModel {
            delta: cfg.deltas[index],
            seed,
        },
    )
}
