//! Scenario registry and verification reports for `kstab-core`.

#![allow(clippy::result_large_err, clippy::large_enum_variant)]

pub mod report;
pub mod run;
pub mod scenario;

pub use report::{CaseResult, Report, Status, Summary};
pub use run::{run_all, run_case, Evaluator, UnknownCase};
pub use scenario::{Scenario, ScenarioError};
