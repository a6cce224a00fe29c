//! Std companion to `licam-core`: spectral analysis, configuration files,
//! CSV/JSON outputs and the `licam-lab` command line tool.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod io;
pub mod signal;
