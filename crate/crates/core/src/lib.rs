//! Performance analysis of a satellite → UAV → ground dual-hop link.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod config;
pub mod error;
pub mod fitting;
pub mod mcsim;
pub mod metrics;
pub mod quad;
pub mod roots;
pub mod snr;
pub mod specfun;

pub use error::{Error, Result};
