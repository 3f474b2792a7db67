//! Std companion of `rmabm-core`: TOML configuration, policy and economy
//! files, frame and summary tables, run manifests, parallel experiment
//! drivers and the `rmabm` command-line tool.

pub mod commands;
pub mod config;
mod error;
pub mod output;
pub mod policy_io;
pub mod run;
pub mod snapshot;

pub use crate::config::RunConfig;
pub use crate::error::Error;
pub use rmabm_core as core;
