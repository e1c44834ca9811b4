//! Library surface of the powershift command-line tool.
//!
//! The binary in `main.rs` is a thin argument-parsing layer; everything it
//! does is callable from here so the integration tests can drive the same
//! code paths directly.

pub mod commands;
pub mod csvio;
pub mod stats;

pub use commands::{
    bench_run, cmd_bench, cmd_compare, cmd_ref, cmd_run, compare_rows, load_scenario, run_discrete,
    run_reference, CliError, ConvergenceRow,
};
pub use stats::TimingStats;
