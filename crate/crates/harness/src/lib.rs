//! Experiment runner for the margin CMA-ES variants and the bit-string
//! baselines: seeded trial batches, termination rules, aggregation and CSV
//! output.

pub mod aggregate;
pub mod config;
pub mod output;
pub mod trial;

pub use aggregate::{aggregate, Outcome, SummaryRow};
pub use config::{Algorithm, ConfigError, RunConfig};
pub use trial::{run_trial, run_trials, Reason, TraceRow, TrialRecord};
