//! Exact asymptotics of transient overload probabilities in Gaussian fluid
//! queues: variance models, queue geometry, horizon regimes, limiting-process
//! constants and the asymptotic formulas themselves.
#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;

pub mod asympt;
pub mod constants;
pub mod error;
pub mod ext;
pub mod gauss;
pub mod geometry;
pub mod oracles;
pub mod quad;
pub mod regimes;
mod roots;
pub mod variance;

pub use error::{Error, Result};
pub use geometry::QueueSpec;
pub use regimes::{classify, HorizonFamily, RegimeClassification, Scenario};
pub use variance::VarianceModel;
