use super::{DecisionContext, RoutingPolicy};
use crate::error::SimError;
use crate::rng::SimRng;
use crate::sim::QueueBoard;
use crate::topology::{hop_distances, HopDistanceTable, NodeId, Topology};

/// Routes to the neighbor advertising the fewest queued packets with the
/// same destination. Ties go to the neighbor closer to the destination,
/// then to the lower index.
pub fn backpressure_decide(
    topo: &Topology,
    table: &HopDistanceTable,
    board: &QueueBoard,
    node: NodeId,
    dst: NodeId,
) -> NodeId {
    *topo
        .neighbors(node)
        .iter()
        .min_by_key(|&&v| {
            let count = if v == dst { 0 } else { board.dst_count(v, dst) };
            (count, table.get(v, dst), v)
        })
        .expect("routers have at least one neighbor")
}

/// FIFO-compatible backpressure. Needs no training.
#[derive(Debug, Clone)]
pub struct Backpressure {
    table: HopDistanceTable,
}

impl Backpressure {
    pub fn new(topo: &Topology) -> Self {
        Self {
            table: hop_distances(topo),
        }
    }
}

impl RoutingPolicy for Backpressure {
    fn name(&self) -> &str {
        "backpressure"
    }

    fn decide(&mut self, ctx: &DecisionContext<'_>, _rng: &mut SimRng) -> Result<NodeId, SimError> {
        Ok(backpressure_decide(
            ctx.topology,
            &self.table,
            ctx.board,
            ctx.node,
            ctx.packet.dst,
        ))
    }
}
