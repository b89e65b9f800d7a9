//! Experiment drivers, file formats and the command-line front end for the
//! star-graph spectral lab. The numerics live in [`core`].
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod dump;
mod error;
pub mod experiments;
pub mod fit;
pub mod report;

pub use error::{Error, Result};
pub use starspec_core as core;
