//! Command-line front end: JSON configuration in, JSON or CSV results out.
//!
//! [`config::parse_config`] turns a document into a validated
//! [`config::RunSpec`], and [`run::run`] executes it. JSON output embeds the
//! resolved document so a run can be repeated from its own output.

pub mod config;
pub mod error;
pub mod run;

pub use config::{parse_config, Command, ConfigDoc, OutputFormat, Overrides, RunSpec, Suite};
pub use error::CliError;
pub use run::{execute, run, Outcome};
