//! Experiment harness for the corpusgate engine.
//!
//! The harness runs a train/test query stream against a corpus under one of
//! three system modes:
//!
//! - `standard`: retrieve and generate, never write back;
//! - `naive`: write every generated response back without validation;
//! - `bidirectional`: validate each response through the acceptance layer
//!   and write back only what passes.
//!
//! Each run produces a machine-readable report (JSON plus CSV), and sweeps
//! over modes and seeds aggregate those reports into a plot-ready CSV. A
//! seeded synthetic dataset generator is included so the whole protocol can
//! be exercised at desk scale with the deterministic mock backends.

pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod metrics;
pub mod report;
pub mod runner;
pub mod synth;

pub use config::{Mode, RunConfig};
pub use error::{Error, Result};
pub use metrics::{aggregate_runs, citation_f1, coverage, mean_std, CitationScores};
pub use report::{Aggregates, BackendCalls, PerQueryRecord, RunReport, RunStatus};
pub use runner::run;
pub use synth::{generate_dataset, SynthSpec};
