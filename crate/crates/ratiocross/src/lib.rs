//! Batch tooling on top of `ratiocross-core`: realization-parallel sampling,
//! CSV/JSON outputs with provenance, crossover sweeps and the CLI.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod io;
pub mod report;
pub mod runner;

pub use ratiocross_core as core;
