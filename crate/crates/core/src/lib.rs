//! Packet error rate of deadline-constrained multi-terminal TDMA networks
//! with cooperative relaying, under finite- and infinite-blocklength coding.

// `!(x > 0.0)` is the NaN-rejecting form used for argument checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod dist;
pub mod error;
pub mod fbl;
pub mod montecarlo;
pub mod overhead;
pub mod path;
pub mod per;
pub mod roots;
pub mod sweep;
pub mod validate;

pub use error::{Error, Result};
