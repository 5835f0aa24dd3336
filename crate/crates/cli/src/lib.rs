//! Sweeps, validation runs and canned studies on top of `aerial_link`,
//! written as CSV tables with optional SVG charts.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod grid;
pub mod repro;
pub mod svg;
pub mod sweep;
pub mod table;
pub mod validate;

pub use error::{CliError, Result};
pub use table::SweepTable;
