//! Scenario runner and acceptance suite for `qrelent-core`: TOML scenario
//! documents in, fixed-column CSV reports and exit codes out.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod error;
pub mod report;
pub mod runner;
pub mod scenario;
pub mod suite;

pub use error::{HarnessError, Result};
pub use report::{CheckRow, Report};
pub use scenario::{load_scenario, parse_scenario, Kind, Scenario};
