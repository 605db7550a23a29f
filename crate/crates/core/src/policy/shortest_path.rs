use super::{DecisionContext, RoutingPolicy};
use crate::error::SimError;
use crate::rng::SimRng;
use crate::topology::{hop_distances, next_hops_on_shortest_path, HopDistanceTable, NodeId, Topology};

/// Lowest-index neighbor on a shortest path to `dst`.
pub fn shortest_path_decide(
    topo: &Topology,
    table: &HopDistanceTable,
    node: NodeId,
    dst: NodeId,
) -> Result<NodeId, SimError> {
    let hops = next_hops_on_shortest_path(topo, table, node, dst)?;
    Ok(hops[0])
}

/// Static minimum-hop routing.
#[derive(Debug, Clone)]
pub struct ShortestPath {
    table: HopDistanceTable,
}

impl ShortestPath {
    pub fn new(topo: &Topology) -> Self {
        Self {
            table: hop_distances(topo),
        }
    }
}

impl RoutingPolicy for ShortestPath {
    fn name(&self) -> &str {
        "shortest_path"
    }

    fn decide(&mut self, ctx: &DecisionContext<'_>, _rng: &mut SimRng) -> Result<NodeId, SimError> {
        shortest_path_decide(ctx.topology, &self.table, ctx.node, ctx.packet.dst)
    }
}
