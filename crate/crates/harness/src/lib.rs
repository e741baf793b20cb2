//! Experiment runner for the order-based diffusion lab.
//!
//! The library side of the `oflab` binary: JSON run configurations
//! ([`config::RunConfig`]), a registry of named experiments
//! ([`experiments::EXPERIMENTS`]) that each produce a machine-readable
//! [`report::Report`] plus CSV/SVG artifacts, and small report/plot
//! utilities. Every experiment is deterministic for a fixed seed: Monte
//! Carlo paths draw from per-path counter-based generators, so results do
//! not depend on thread count or scheduling.

// Validation guards are written as `!(x > 0)` rather than `x <= 0` so that a
// NaN input fails the guard instead of slipping past it.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod plot;
pub mod report;

pub use config::{RunConfig, DEFAULT_SEED};
pub use error::{Error, Result};
pub use experiments::run_experiment;
pub use report::{MetricRow, Report};
