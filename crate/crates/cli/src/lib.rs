//! Configuration, records and commands behind the `everett-lab` binary.

pub mod commands;
pub mod config;
pub mod record;

pub use commands::{Context, Failure};
pub use config::{ConfigError, RunConfig};
pub use record::ResultRecord;
