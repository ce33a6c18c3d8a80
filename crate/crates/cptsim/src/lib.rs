//! Std companion to `cptsim-core`: multi-threaded evaluation, noisy scan
//! simulation, CSV/JSON file formats and the `cptsim` command-line tool.

pub mod commands;
pub mod error;
pub mod io;
pub mod manifest;
pub mod par;
pub mod scans;

pub use cptsim_core as model;
pub use error::{CliError, CliResult};
