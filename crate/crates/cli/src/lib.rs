//! Library surface of the command-line tool, split out so the subcommands
//! are testable without spawning processes.

pub mod commands;
pub mod config;
pub mod pipeline;

pub use commands::{cmd_clean_data, cmd_dispatch, cmd_export_mps, cmd_solve, cmd_sweep};
pub use commands::{CmdError, SweepAxis};
pub use config::{StudyConfig, DATA_DIR_ENV};
