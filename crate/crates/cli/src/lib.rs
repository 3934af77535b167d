//! Experiment sweeps over the distributed inverse QFT: per-figure CSV tables
//! and the end-to-end equivalence check.

pub mod config;
pub mod error;
pub mod experiments;

pub use config::{Command, IntRange, Overrides, SweepConfig, Threshold};
pub use error::CliError;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/experiments.md")]
mod book_experiments {}
