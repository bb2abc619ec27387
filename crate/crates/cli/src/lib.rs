//! Experiment plumbing behind the `flbench` binary: configuration, corpus
//! generation, solver runs, resumable sweeps and table output.

pub mod analyze;
pub mod config;
pub mod corpus;
pub mod error;
pub mod runner;
pub mod sweep;
