//! Configuration-driven front end.

pub mod commands;
pub mod config;

pub use commands::execute;
pub use config::{parse_config, Command, JobConfig, Tolerances};
