//! Configuration, commands and artifact export for the `polariton2d` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod validate;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
