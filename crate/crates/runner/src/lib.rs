//! Experiment runner: configuration, input loading, end-to-end runs,
//! sweeps, the similarity pilot and report output.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod fixture;
pub mod inputs;
pub mod output;
pub mod pilot;

pub use config::{Mode, RunConfig};
pub use error::{Result, RunError};
pub use experiment::{run_experiment, run_sweep};
pub use inputs::Inputs;
