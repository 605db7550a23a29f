//! The routing-policy contract and the non-deep baselines.
//!
//! A policy object serves every node of one simulation run, but keeps
//! strictly per-node state inside (one table or one network per router):
//! nothing learned at one node is visible to another except through the
//! explicit read-only bootstrap lookup of the receiving agent.

mod backpressure;
mod qrouting;
mod shortest_path;

pub use backpressure::{backpressure_decide, Backpressure};
pub use qrouting::{qrouting_decide, qrouting_update, QRouting, QRoutingParams, QTable, TabularTransition};
pub use shortest_path::{shortest_path_decide, ShortestPath};

use crate::error::SimError;
use crate::rng::SimRng;
use crate::sim::{HopReward, Packet, QueueBoard};
use crate::sim::traffic::Millis;
use crate::topology::{NodeId, Topology};

/// What a node can observe when it routes its head-of-line packet.
#[derive(Debug, Clone, Copy)]
pub struct DecisionContext<'a> {
    pub now: Millis,
    pub node: NodeId,
    pub packet: &'a Packet,
    pub topology: &'a Topology,
    /// Destinations of the packets queued behind the current one, in queue
    /// order, truncated to the configured lookahead.
    pub upcoming: &'a [NodeId],
    /// Next hops chosen for the most recently routed packets, newest first.
    pub history: &'a [NodeId],
    /// Neighbor queue advertisements, possibly stale.
    pub board: &'a QueueBoard,
}

impl DecisionContext<'_> {
    pub fn neighbors(&self) -> &[NodeId] {
        self.topology.neighbors(self.node)
    }

    /// Neighbor with the longest advertised queue; lowest index on ties.
    pub fn max_queue_neighbor(&self) -> Option<NodeId> {
        let mut best: Option<(NodeId, usize)> = None;
        for &v in self.neighbors() {
            let len = self.board.queue_len(v);
            if best.is_none_or(|(_, b)| len > b) {
                best = Some((v, len));
            }
        }
        best.map(|(v, _)| v)
    }
}

/// Outcome of one hop, reported to the sending node's policy.
#[derive(Debug, Clone, Copy)]
pub struct HopFeedback<'a> {
    pub sender: NodeId,
    pub receiver: NodeId,
    pub packet: &'a Packet,
    pub reward: HopReward,
    /// True when the receiver is the packet's destination.
    pub terminal: bool,
    /// The receiver's view with this packet as its current packet, taken at
    /// receipt. `None` when the hop is terminal.
    pub receiver_view: Option<DecisionContext<'a>>,
}

pub trait RoutingPolicy {
    fn name(&self) -> &str;

    /// Picks a neighbor of `ctx.node` for `ctx.packet`.
    fn decide(&mut self, ctx: &DecisionContext<'_>, rng: &mut SimRng) -> Result<NodeId, SimError>;

    /// Called once per completed hop. No-op for non-learning policies.
    fn on_hop(&mut self, _hop: &HopFeedback<'_>, _rng: &mut SimRng) {}

    fn is_learning(&self) -> bool {
        false
    }

    /// Exploration probability for subsequent decisions.
    fn set_epsilon(&mut self, _epsilon: f64) {}

    /// Enables or disables parameter updates.
    fn set_learning(&mut self, _enabled: bool) {}

    /// Called at the start of each independent episode.
    fn reset_episode(&mut self) {}
}

impl<P: RoutingPolicy + ?Sized> RoutingPolicy for Box<P> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn decide(&mut self, ctx: &DecisionContext<'_>, rng: &mut SimRng) -> Result<NodeId, SimError> {
        (**self).decide(ctx, rng)
    }
    fn on_hop(&mut self, hop: &HopFeedback<'_>, rng: &mut SimRng) {
        (**self).on_hop(hop, rng)
    }
    fn is_learning(&self) -> bool {
        (**self).is_learning()
    }
    fn set_epsilon(&mut self, epsilon: f64) {
        (**self).set_epsilon(epsilon)
    }
    fn set_learning(&mut self, enabled: bool) {
        (**self).set_learning(enabled)
    }
    fn reset_episode(&mut self) {
        (**self).reset_episode()
    }
}

/// Index of the smallest value, lowest index on ties.
pub(crate) fn argmin(values: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}
