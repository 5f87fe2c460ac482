//! Problem generation, noise injection, noise-level sweeps and reports.

mod noise;
mod problems;
mod report;
mod slope;
mod study;
pub mod verify;

pub use noise::{inject_noise, NoiseModel};
pub use problems::{make_blur_problem, make_diagonal_problem, ProblemInstance, ProblemSpec, SolutionProfile};
pub use report::{emit_report, CSV_HEADER, parse_json_report, to_csv_string, to_json_string, ReportFormat};
pub use slope::fit_loglog_slope;
pub use study::{
    estimate_opnorm, row_data, run_rate_study, AlphaSource, FittedSlopes, RateStudyResult, StudyConfig, StudyEcho, StudyRow,
    DEFAULT_DELTAS,
};
