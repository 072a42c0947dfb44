//! File formats, parallel execution and output for `idobs-core` scenarios.
//!
//! - [`config`]: versioned JSON scenario documents
//! - [`trace_csv`]: CSV traces with a commented header
//! - [`plot`]: SVG panels for eyeballing a run
//! - [`runner`]: runs a scenario (sweep members in parallel) and writes outputs

pub mod config;
pub mod plot;
pub mod runner;
pub mod trace_csv;

pub use idobs_core as core;
