//! File formats, reports and drivers behind the `turnpike` command.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod batch;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod problem;
pub mod report;
pub mod trajectory_csv;

pub use config::{Method, RunConfig};
pub use error::{CliError, Result};
