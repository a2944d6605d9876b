//! Config loading, run orchestration and output writing behind the
//! `ioeco` binary.

pub mod config;
pub mod error;
pub mod panel;
pub mod run;

pub use config::{Overrides, RunConfig};
pub use error::{exit, CliError};
