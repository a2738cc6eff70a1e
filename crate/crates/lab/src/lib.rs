//! Experiment runner: configuration, result cache and file outputs for the
//! `sflow` command-line tool.

pub mod cache;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod runner;

pub use error::LabError;
