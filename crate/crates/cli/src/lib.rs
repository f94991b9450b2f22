//! Command-line front end for `ecami-core`: single reports, resumable scans,
//! particle-model curves and the rule-184 box-counting check.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod scan;

pub use error::{CliError, CliResult};
