//! Convex variational regularization of ill-posed linear inverse problems.
//!
//! The crate minimizes Tikhonov-type objectives
//! `F_α(φ) = ½‖Tφ − f^δ‖² + α·J(φ)` for smooth convex penalties `J`,
//! measures the result with Bregman divergences, selects `α` with a-priori
//! rules or the discrepancy principle, and runs noise-level sweeps that fit
//! empirical convergence orders.
//!
//! Module map:
//!
//! * [`operators`]: forward operators `T`, adjoints and `‖T‖` estimation.
//! * [`penalties`]: the penalty catalog with analytic gradients and constants.
//! * [`variational`]: the cost functional, the accelerated solver and a
//!   closed-form Tikhonov oracle.
//! * [`bregman`]: Bregman divergences of the penalty, misfit and cost.
//! * [`regparam`]: parameter rules, admissibility and inequality checks.
//! * [`experiments`]: problem generation, noise, rate studies and reports.

pub mod bregman;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod operators;
pub mod penalties;
pub mod regparam;
pub mod variational;

pub use bregman::{BregmanReport, Functional, MisfitConvexityEstimate};
pub use error::{Error, Result};
pub use linalg::Vector;
pub use operators::{ForwardOperator, OperatorKind, OperatorNormEstimate};
pub use penalties::{Constant, Penalty, PenaltyCatalogEntry, Radius};
pub use regparam::{AdmissibilityRecord, ParamRule};
pub use variational::{CostFunctional, Misfit, SolveConfig, SolveResult};
