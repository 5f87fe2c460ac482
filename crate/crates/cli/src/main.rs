//! `varreg`: noise-level rate studies, invariant suites and `τ(L_H)`.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use varreg_core::experiments::verify::{self, CheckStatus, Suite};
use varreg_core::experiments::{
    emit_report, estimate_opnorm, make_blur_problem, make_diagonal_problem, run_rate_study,
    to_csv_string, to_json_string, ProblemInstance, RateStudyResult, ReportFormat, SolutionProfile,
    StudyConfig,
};
use varreg_core::regparam::tau_of_hessian_lipschitz;
use varreg_core::{Constant, Error, ParamRule, Penalty, PenaltyCatalogEntry, SolveConfig};

#[derive(Parser)]
#[command(name = "varreg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the noise level and report errors, Bregman divergences and fitted slopes
    RateStudy(RateStudyArgs),
    /// Run an invariant suite and print one line per check
    Verify {
        #[arg(long, value_enum)]
        suite: Option<SuiteArg>,
    },
    /// Print τ(L_H) = (1 + ‖T*‖²/L_H)^{1/2}
    Tau {
        #[arg(long)]
        lh: f64,
        #[arg(long)]
        opnorm: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    Diagonal,
    Blur,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Smooth,
    Bump,
}

#[derive(Clone, Copy, ValueEnum)]
enum PenaltyArg {
    Quadratic,
    PseudoHuberStrong,
    QuarticStrong,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Sqrt,
    Power,
    HessianSqrt,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Bregman,
    Optimality,
    Lemmas,
}

#[derive(Args)]
struct RateStudyArgs {
    #[arg(long, value_enum, default_value = "diagonal")]
    problem: ProblemArg,
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// Singular value decay `s` of the diagonal problem
    #[arg(long, default_value_t = 1.0)]
    decay: f64,
    /// True solution of the diagonal problem
    #[arg(long, value_enum, default_value = "smooth")]
    profile: ProfileArg,
    /// Gaussian kernel width of the blur problem, in samples
    #[arg(long, default_value_t = 2.0)]
    width: f64,
    #[arg(long, value_enum, default_value = "pseudo-huber-strong")]
    penalty: PenaltyArg,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Ball radius for the quartic Hessian-Lipschitz certificate
    #[arg(long, default_value_t = 2.0)]
    radius: f64,
    #[arg(long, value_enum, default_value = "sqrt")]
    rule: RuleArg,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    /// Exponent of the power rule
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// L_H for the hessian-sqrt rule; defaults to the penalty's certified constant
    #[arg(long)]
    lh: Option<f64>,
    /// Comma-separated, strictly decreasing noise levels
    #[arg(long, value_delimiter = ',')]
    deltas: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// on/off: replace an inadmissible rule α by the largest admissible one
    #[arg(long, value_parser = parse_switch, action = ArgAction::Set, default_value = "off")]
    discrepancy_search: bool,
    #[arg(long, default_value_t = 1e-9)]
    grad_tol: f64,
    #[arg(long, default_value_t = 50_000)]
    max_iter: usize,
    /// Report path; standard output when absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

fn parse_switch(s: &str) -> Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected on/off or true/false, got `{s}`")),
    }
}

/// Core errors caused by the arguments rather than the computation.
fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidParameter(_)
            | Error::InvalidGrid(_)
            | Error::HessianLipschitzZero
            | Error::NoGlobalHessianLipschitz(_)
    )
}

enum Failure {
    Check,
    Usage(Error),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if is_usage_error(&e) {
            Failure::Usage(e)
        } else {
            Failure::Run(e)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::RateStudy(args) => rate_study(&args),
        Command::Verify { suite } => run_verify(suite),
        Command::Tau { lh, opnorm } => tau(lh, opnorm),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn penalty_entry(args: &RateStudyArgs) -> PenaltyCatalogEntry {
    match args.penalty {
        PenaltyArg::Quadratic => PenaltyCatalogEntry::Quadratic,
        PenaltyArg::PseudoHuberStrong => PenaltyCatalogEntry::PseudoHuberStrong {
            mu: args.mu,
            eps: args.eps,
        },
        PenaltyArg::QuarticStrong => PenaltyCatalogEntry::QuarticStrong {
            mu: args.mu,
            radius: args.radius,
        },
    }
}

fn build_problem(args: &RateStudyArgs) -> Result<ProblemInstance, Error> {
    let entry = penalty_entry(args);
    Penalty::new(entry)?;
    match args.problem {
        ProblemArg::Diagonal => {
            let profile = match args.profile {
                ProfileArg::Smooth => SolutionProfile::Smooth,
                ProfileArg::Bump => SolutionProfile::Bump,
            };
            make_diagonal_problem(args.n, args.decay, profile, entry)
        }
        ProblemArg::Blur => make_blur_problem(args.n, args.width, entry),
    }
}

fn build_rule(args: &RateStudyArgs, problem: &ProblemInstance) -> Result<ParamRule, Error> {
    match args.rule {
        RuleArg::Sqrt => ParamRule::sqrt(args.tau, estimate_opnorm(problem)?),
        RuleArg::Power => ParamRule::power(args.p),
        RuleArg::HessianSqrt => {
            let lh = match args.lh {
                Some(lh) => lh,
                None => match Penalty::new(problem.penalty)?.hessian_lipschitz() {
                    Constant::Known(lh) => lh,
                    Constant::Unknown => {
                        return Err(Error::NoGlobalHessianLipschitz(problem.penalty.name()))
                    }
                },
            };
            ParamRule::hessian_sqrt(lh, estimate_opnorm(problem)?)
        }
    }
}

fn rate_study(args: &RateStudyArgs) -> Result<(), Failure> {
    let problem = build_problem(args)?;
    let mut cfg = StudyConfig::new(build_rule(args, &problem)?);
    if !args.deltas.is_empty() {
        cfg.deltas = args.deltas.clone();
    }
    cfg.seed = args.seed;
    cfg.repeats = args.repeats;
    cfg.discrepancy_search = args.discrepancy_search;
    cfg.tau = args.tau;
    cfg.solve = SolveConfig {
        grad_tol: args.grad_tol,
        max_iter: args.max_iter,
        ..SolveConfig::default()
    };
    let result = run_rate_study(&problem, &cfg)?;

    let format = match args.format {
        FormatArg::Csv => ReportFormat::Csv,
        FormatArg::Json => ReportFormat::Json,
    };
    match &args.out {
        Some(path) => emit_report(&result, format, path)?,
        None => {
            let text = match format {
                ReportFormat::Csv => to_csv_string(&result)?,
                ReportFormat::Json => to_json_string(&result)?,
            };
            // a closed pipe is not worth a panic
            let _ = std::io::stdout().write_all(text.as_bytes());
        }
    }
    summarize(&result)
}

fn slope(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |s| format!("{s:.3}"))
}

/// Prints a summary to stderr; fails when any row violates a checked inequality.
fn summarize(result: &RateStudyResult) -> Result<(), Failure> {
    let rows = &result.rows;
    let admissible = rows.iter().filter(|r| r.admissible).count();
    let s = &result.fitted_slopes;
    eprintln!(
        "{}: {} rows, {admissible} admissible; slopes vs δ: error {}, D_J {}, D_G {}",
        result.config.problem,
        rows.len(),
        slope(s.error_vs_delta),
        slope(s.d_j_vs_delta),
        slope(s.d_g_vs_delta),
    );
    let mut violations = 0;
    for r in rows {
        let mut failed = Vec::new();
        if !r.residual_bound.holds {
            failed.push("residual bound");
        }
        if !r.weak_convergence.holds {
            failed.push("weak convergence");
        }
        if r.admissible && r.hessian_discrepancy.is_some_and(|h| !h.holds) {
            failed.push("Hessian discrepancy bound");
        }
        if r.bregman_bound.is_some_and(|b| !b.holds) {
            failed.push("Bregman bound");
        }
        if !failed.is_empty() {
            violations += 1;
            eprintln!("δ = {:e}: {} violated", r.delta, failed.join(", "));
        }
    }
    if violations > 0 {
        Err(Failure::Check)
    } else {
        Ok(())
    }
}

fn run_verify(suite: Option<SuiteArg>) -> Result<(), Failure> {
    let suites: Vec<Suite> = match suite {
        None => Suite::ALL.to_vec(),
        Some(SuiteArg::Bregman) => vec![Suite::Bregman],
        Some(SuiteArg::Optimality) => vec![Suite::Optimality],
        Some(SuiteArg::Lemmas) => vec![Suite::Lemmas],
    };
    let mut failed = 0;
    for s in suites {
        for outcome in verify::run_suite(s)? {
            println!("{}/{outcome}", s.name());
            failed += usize::from(outcome.status == CheckStatus::Fail);
        }
    }
    if failed > 0 {
        Err(Failure::Check)
    } else {
        Ok(())
    }
}

fn tau(lh: f64, opnorm: f64) -> Result<(), Failure> {
    if !(opnorm > 0.0) {
        return Err(Error::InvalidParameter(format!("‖T*‖ must be positive, got {opnorm}")).into());
    }
    println!("{}", tau_of_hessian_lipschitz(lh, opnorm)?);
    Ok(())
}
