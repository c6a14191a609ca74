//! Configuration loading, suite dispatch and report emission for the
//! `discofield` command-line tool.

pub mod config;
pub mod registry;
pub mod report;
pub mod suites;

pub use config::{default_config, load_config, parse_config, ConfigError, RunConfig};
pub use report::{Check, Report};
pub use suites::{run, run_suite, Command, RunOptions};
