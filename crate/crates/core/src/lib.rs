//! Discrete-time macro agent-based economy (households, one bank, capital-good
//! and consumption-good firms) in which consumption-good firms are driven
//! either by a trend-following heuristic or by tabular Q-learning agents.
//!
//! The crate is `no_std` + `alloc`. File formats, the CLI and parallel
//! execution live in the `rmabm` companion crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod economy;
mod error;
pub mod harness;
pub mod heuristic;
mod math;
mod params;
pub mod rl;
pub mod rng;

pub use crate::error::{ConfigError, Error};
pub use crate::params::ModelParams;
