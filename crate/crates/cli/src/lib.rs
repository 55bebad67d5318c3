//! Configuration, orchestration and result files for the kinetic interface experiments.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod values;
