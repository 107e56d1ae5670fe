//! Experiment laboratory around `filmlab-core`: configuration files,
//! initial-data families, run artifacts, and the verification suites
//! behind the `filmlab` command-line tool.

pub mod config;
pub mod datum;
pub mod error;
pub mod report;
pub mod runner;
pub mod suites;

pub use error::{LabError, LabResult};
