#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bundles;
pub mod cli;
pub mod error;
pub mod panel;
pub mod pipeline;
pub mod processes;
pub mod profile;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use rng::{RngStream, StreamId};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
