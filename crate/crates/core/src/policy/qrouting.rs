use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{argmin, DecisionContext, HopFeedback, RoutingPolicy};
use crate::error::SimError;
use crate::rng::SimRng;
use crate::topology::{NodeId, Topology};

/// Per-node tables of estimated remaining delivery time: `q[n][d][a]` for
/// every destination `d` and neighbor index `a` of `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    n: usize,
    offsets: Vec<usize>,
    degrees: Vec<usize>,
    values: Vec<f64>,
}

impl QTable {
    /// All-zero table.
    pub fn zeros(topo: &Topology) -> Self {
        let n = topo.n_nodes();
        let degrees: Vec<usize> = topo.nodes().map(|u| topo.degree(u)).collect();
        let mut offsets = Vec::with_capacity(n);
        let mut total = 0;
        for &deg in &degrees {
            offsets.push(total);
            total += deg * n;
        }
        Self {
            n,
            offsets,
            degrees,
            values: vec![0.0; total],
        }
    }

    /// Estimates at `node` for destination `dst`, one per neighbor index.
    pub fn row(&self, node: NodeId, dst: NodeId) -> &[f64] {
        let deg = self.degrees[node.0];
        let start = self.offsets[node.0] + dst.0 * deg;
        &self.values[start..start + deg]
    }

    pub fn row_mut(&mut self, node: NodeId, dst: NodeId) -> &mut [f64] {
        let deg = self.degrees[node.0];
        let start = self.offsets[node.0] + dst.0 * deg;
        &mut self.values[start..start + deg]
    }

    /// Best (smallest) estimate at `node` for `dst`; zero at the destination.
    pub fn best(&self, node: NodeId, dst: NodeId) -> f64 {
        if node == dst {
            return 0.0;
        }
        self.row(node, dst).iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    /// True when the table's layout fits `topo` (e.g. after deserializing).
    pub fn fits(&self, topo: &Topology) -> bool {
        let fresh = Self::zeros(topo);
        self.n == fresh.n
            && self.degrees == fresh.degrees
            && self.offsets == fresh.offsets
            && self.values.len() == fresh.values.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QRoutingParams {
    pub learning_rate: f64,
    pub epsilon: f64,
}

impl Default for QRoutingParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.7,
            epsilon: 0.0,
        }
    }
}

/// Greedy (time-minimizing) or uniformly random neighbor index.
pub fn qrouting_decide(table: &QTable, node: NodeId, dst: NodeId, epsilon: f64, rng: &mut SimRng) -> usize {
    let row = table.row(node, dst);
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        rng.random_range(0..row.len())
    } else {
        argmin(row.iter().copied()).expect("non-empty neighbor set")
    }
}

/// One observed hop, as seen by the sending node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TabularTransition {
    pub node: NodeId,
    pub dst: NodeId,
    pub next: NodeId,
    pub reward: f64,
    pub terminal: bool,
}

/// `q[n][d][v] += lr * (r + (1 - f) * min_a q[v][d][a] - q[n][d][v])`.
pub fn qrouting_update(table: &mut QTable, topo: &Topology, tr: &TabularTransition, learning_rate: f64) {
    let tau = if tr.terminal { 0.0 } else { table.best(tr.next, tr.dst) };
    let target = tr.reward + tau;
    let a = topo.action_index(tr.node, tr.next).expect("next hop is a neighbor");
    let entry = &mut table.row_mut(tr.node, tr.dst)[a];
    *entry += learning_rate * (target - *entry);
}

/// Tabular Q-routing, one table per node.
#[derive(Debug, Clone)]
pub struct QRouting {
    topo: Topology,
    table: QTable,
    params: QRoutingParams,
    learning: bool,
}

impl QRouting {
    pub fn new(topo: &Topology, params: QRoutingParams) -> Self {
        Self {
            topo: topo.clone(),
            table: QTable::zeros(topo),
            params,
            learning: true,
        }
    }

    pub fn table(&self) -> &QTable {
        &self.table
    }

    pub fn table_mut(&mut self) -> &mut QTable {
        &mut self.table
    }

    pub fn params(&self) -> QRoutingParams {
        self.params
    }
}

impl RoutingPolicy for QRouting {
    fn name(&self) -> &str {
        "q_routing"
    }

    fn decide(&mut self, ctx: &DecisionContext<'_>, rng: &mut SimRng) -> Result<NodeId, SimError> {
        let a = qrouting_decide(&self.table, ctx.node, ctx.packet.dst, self.params.epsilon, rng);
        Ok(ctx.neighbors()[a])
    }

    fn on_hop(&mut self, hop: &HopFeedback<'_>, _rng: &mut SimRng) {
        if !self.learning {
            return;
        }
        let tr = TabularTransition {
            node: hop.sender,
            dst: hop.packet.dst,
            next: hop.receiver,
            reward: hop.reward.total(),
            terminal: hop.terminal,
        };
        qrouting_update(&mut self.table, &self.topo, &tr, self.params.learning_rate);
    }

    fn is_learning(&self) -> bool {
        true
    }

    fn set_epsilon(&mut self, epsilon: f64) {
        self.params.epsilon = epsilon;
    }

    fn set_learning(&mut self, enabled: bool) {
        self.learning = enabled;
    }
}
