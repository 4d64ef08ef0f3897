//! Config-driven driver for the invharm pipeline: solve, verify, oracle,
//! scan and bessel-table, each writing CSV artifacts stamped with the config
//! digest.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod output;
pub mod settings;

pub use commands::{Options, TableArgs};
pub use error::{exit, CliError};
pub use settings::RunConfig;
