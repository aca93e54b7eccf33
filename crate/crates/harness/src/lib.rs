//! Experiment harness for `ilgap-core`: JSON configs, horizon and sample
//! sweeps, the bound-certification suite and CSV/JSON emission.
//!
//! Exit codes of the `ilgap` binary: 0 on success, 2 for configuration
//! errors, 3 when a deterministic bound is violated, 1 otherwise.

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod emit;
pub mod error;
pub mod stats;
pub mod suite;
pub mod sweep;
pub mod train;
pub mod training;

pub use config::{Algorithm, BoundSuiteConfig, EnvDumpConfig, SweepConfig, SweepKind, TrainConfig, CONFIG_SCHEMA_VERSION};
pub use emit::{emit_results, load_result};
pub use error::{HarnessError, Result};
pub use suite::{run_bound_suite, SuiteResult};
pub use sweep::{run_horizon_sweep, run_sample_sweep, SweepResult, SweepRow};
