//! Change-based exploration transfer (CBET) testbench.
//!
//! Count-based novelty over hashed states and state changes, reward mixing,
//! and two ways of transferring an exploration policy into a task policy,
//! run in seeded sparse-reward gridworlds.

pub mod agent;
pub mod collector;
pub mod error;
pub mod gridworld;
pub mod harness;
pub mod novelty;
pub mod rng;
pub mod transfer;

pub use error::{Error, Result};
