//! Problem-file ingestion, the five commands and their reports.

mod commands;
mod problem;
mod report;

pub use commands::{run, run_file, Command};
pub use problem::*;
pub use report::{exit, exit_code_for, Report, Status};
