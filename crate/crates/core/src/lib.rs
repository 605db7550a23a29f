//! Packet routing simulator with fully distributed multi-agent deep
//! recurrent Q-routing (DQRC) and its baselines.

pub mod dqrc;
pub mod error;
pub mod experiment;
pub mod nn;
pub mod policy;
pub mod rng;
pub mod sim;
pub mod topology;

pub use error::{Error, Result};
pub use topology::{NodeId, Topology};
