//! Deep recurrent Q-routing with communication.
//!
//! Network outputs are estimated remaining delivery times in ms, so the
//! greedy action and the bootstrap value both take the minimum over
//! neighbors.

mod agent;
mod checkpoint;
mod encode;
mod policy;
mod pretrain;
mod replay;

pub use agent::{
    compute_target, compute_targets, network_spec, select_action, train_step, ActionChoice, Agent,
    AgentHyperParams, ArchConfig,
};
pub use checkpoint::{agent_file, load_checkpoint, load_policy, read_manifest, save_checkpoint, CheckpointManifest, MANIFEST_FILE};
pub use encode::{encode_parts, encode_state, one_hot, DqrcVariant, EncodedState, EncoderConfig};
pub use policy::{Dqrc, DqrcConfig, FlagRecord};
pub use pretrain::{pretrain, pretrain_samples, PretrainConfig};
pub use replay::{ReplayBuffer, Transition};

use crate::sim::Simulation;
use crate::topology::NodeId;

/// Queue length `node` currently advertises to its neighbors.
pub fn advertise_queue_length(sim: &Simulation<'_>, node: NodeId) -> usize {
    sim.queue_len(node)
}

#[cfg(test)]
mod tests;
