//! Scenario-driven front end for the `qfgr` binary.
//!
//! Scenarios are JSON documents; see the repository README for the schema.
//! Each subcommand computes every output in memory, then writes the files
//! atomically together with a manifest that reproduces the run.

pub mod app;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use error::CliError;
