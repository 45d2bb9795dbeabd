//! Scenario files, built-in reproductions and run reports.

pub mod builtins;
pub mod config;
pub mod corpus;
pub mod expr;
pub mod report;
pub mod runner;

pub use builtins::{builtin_repro, repro_all, Builtin};
pub use config::{parse_norm, Scenario, ScenarioConfig};
pub use report::{traces_csv, CheckResult, NamedValue, Report};
pub use runner::{run_compiled, run_scenario};
