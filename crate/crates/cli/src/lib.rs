//! Scenario files, parameter sweeps and figure recipes on top of
//! `hbgbc-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod ed;
pub mod error;
pub mod format;
pub mod output;
pub mod run;
pub mod sweep;
pub mod timesharing;
pub mod verify;

pub use config::ScenarioFile;
pub use ed::{ed_latency_rows, render_ed_csv, run_ed_latency};
pub use error::{CliError, Result};
pub use format::{fmt_sig, render_csv, CurveRecord};
pub use run::{Overrides, Written};
pub use sweep::{run_sweep, sweep_records};
pub use timesharing::{run_timesharing, timesharing_records};
pub use verify::{hard_failure, render_ndjson, run_checks};
