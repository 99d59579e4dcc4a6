//! CMA-ES with margin for mixed-integer, integer, and binary black-box
//! optimization.
//!
//! The crate provides the population-based (μ/μ_w, λ)-CMA-ES with margin
//! ([`cma_wm`]), its elitist (1+1) counterpart ([`elitist`]), three
//! probability-vector and mutation baselines for bit strings
//! ([`baselines`]), and the benchmark objectives used to compare them
//! ([`benchmarks`]). Every optimizer speaks the same [`AskTell`] protocol.

pub mod baselines;
pub mod benchmarks;
pub mod cma_wm;
pub mod elitist;
pub mod error;
pub mod margin;
pub mod numerics;
pub mod optimizer;
pub mod rng;
pub mod space;

pub use error::{Error, Result};
pub use optimizer::{AskTell, Snapshot, StepRecord};
pub use rng::RandomStream;
pub use space::{DiscreteSet, FeasiblePoint, SearchSpace};
