//! Simulation, Monte Carlo estimation, validation studies and file formats
//! for transient Gaussian fluid-queue asymptotics. The formulas live in
//! [`gfq_core`].

// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod constants;
pub mod error;
pub mod estimate;
pub mod export;
pub mod harness;
pub mod rng;
pub mod simulate;

pub use error::{Error, Result};
pub use gfq_core;
