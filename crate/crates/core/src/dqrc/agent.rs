use rand::Rng;
use serde::{Deserialize, Serialize};

use super::encode::{DqrcVariant, EncodedState, EncoderConfig};
use super::replay::{ReplayBuffer, Transition};
use crate::error::NetError;
use crate::nn::{td_loss, HiddenState, NetworkSpec, Optimizer, OptimizerKind, QNetwork, RecurrentKind};
use crate::policy::argmin;
use crate::rng::SimRng;
use crate::topology::{NodeId, Topology};

/// Layer sizes shared by every agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchConfig {
    /// First-layer units per input block.
    pub subset_width: usize,
    /// Dense layers between the first layer and the recurrent layer.
    pub hidden_layers: usize,
    /// Width of those dense layers and of the recurrent layer.
    pub hidden_width: usize,
}

impl Default for ArchConfig {
    fn default() -> Self {
        Self {
            subset_width: 32,
            hidden_layers: 2,
            hidden_width: 128,
        }
    }
}

pub fn network_spec(enc: &EncoderConfig, variant: DqrcVariant, arch: &ArchConfig, degree: usize) -> NetworkSpec {
    NetworkSpec {
        input_blocks: variant.input_blocks(enc),
        subset_width: arch.subset_width,
        trunk_widths: vec![arch.hidden_width; arch.hidden_layers],
        recurrent: match variant {
            DqrcVariant::NoLstm => RecurrentKind::Dense,
            _ => RecurrentKind::Lstm,
        },
        recurrent_width: arch.hidden_width,
        outputs: degree,
        forget_bias: 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentHyperParams {
    pub epsilon: f64,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    /// Train once every this many stored transitions; 1 trains on every one.
    pub train_period: usize,
    pub replay_capacity: usize,
    pub batch_size: usize,
}

impl Default for AgentHyperParams {
    fn default() -> Self {
        Self {
            epsilon: 0.0,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::RmsProp,
            train_period: 1,
            replay_capacity: 100,
            batch_size: 16,
        }
    }
}

/// One router's learner: its own network, optimizer, replay and
/// recurrent state.
#[derive(Debug, Clone)]
pub struct Agent {
    node: NodeId,
    neighbors: Vec<NodeId>,
    net: QNetwork,
    opt: Optimizer,
    replay: ReplayBuffer,
    /// Recurrent state carried across this agent's decisions.
    pub state: HiddenState,
    stored: u64,
}

impl Agent {
    pub fn new(node: NodeId, topo: &Topology, net: QNetwork, hyper: &AgentHyperParams) -> Result<Self, NetError> {
        let neighbors = topo.neighbors(node).to_vec();
        if net.spec().outputs != neighbors.len() {
            return Err(NetError::Shape {
                what: "output width vs degree",
                expected: neighbors.len(),
                actual: net.spec().outputs,
            });
        }
        Ok(Self {
            node,
            state: net.zero_state(),
            opt: Optimizer::new(hyper.optimizer, hyper.learning_rate, net.param_count()),
            replay: ReplayBuffer::new(hyper.replay_capacity),
            neighbors,
            net,
            stored: 0,
        })
    }

    pub fn node(&self) -> NodeId {
        self.node
    }

    pub fn neighbors(&self) -> &[NodeId] {
        &self.neighbors
    }

    pub fn net(&self) -> &QNetwork {
        &self.net
    }

    pub fn net_mut(&mut self) -> &mut QNetwork {
        &mut self.net
    }

    pub fn replay(&self) -> &ReplayBuffer {
        &self.replay
    }

    /// Stores a transition; returns true when a training step is due.
    pub fn store(&mut self, t: Transition, train_period: usize) -> bool {
        self.replay.push(t);
        self.stored += 1;
        self.stored % train_period.max(1) as u64 == 0
    }

    pub fn reset_state(&mut self) {
        self.state.reset();
    }

    /// Replaces the optimizer (and its accumulators).
    pub fn reset_optimizer(&mut self, kind: OptimizerKind, learning_rate: f64) {
        self.opt = Optimizer::new(kind, learning_rate, self.net.param_count());
    }
}

/// Result of one forward decision.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionChoice {
    pub index: usize,
    pub next: NodeId,
    pub q_values: Vec<f64>,
    pub h_next: HiddenState,
}

/// Greedy choice minimizes estimated delivery time (lowest index on ties);
/// with probability `epsilon` a uniformly random neighbor instead.
pub fn select_action(
    agent: &Agent,
    s: &EncodedState,
    h: &HiddenState,
    epsilon: f64,
    rng: &mut SimRng,
) -> Result<ActionChoice, NetError> {
    let (q_values, h_next) = agent.net.forward(s.as_slice(), h)?;
    let index = if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        rng.random_range(0..agent.neighbors.len())
    } else {
        argmin(q_values.iter().copied()).expect("agent has neighbors")
    };
    Ok(ActionChoice {
        index,
        next: agent.neighbors[index],
        q_values,
        h_next,
    })
}

/// `y = r + (1 - f) * min_a Q_v(s', h', a)` using the receiver's current
/// network.
pub fn compute_target(t: &Transition, receiver: &QNetwork) -> Result<f64, NetError> {
    if t.terminal {
        return Ok(t.reward);
    }
    let (q, _) = receiver.forward(t.s_next.as_slice(), &t.h_next)?;
    Ok(t.reward + q.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Targets for a batch, one forward pass per distinct receiver. `net_of`
/// maps a receiver to its network.
pub fn compute_targets<'a>(
    batch: &[&Transition],
    net_of: impl Fn(NodeId) -> &'a QNetwork,
) -> Result<Vec<f64>, NetError> {
    let mut targets: Vec<f64> = batch.iter().map(|t| t.reward).collect();
    let mut receivers: Vec<NodeId> = batch.iter().filter(|t| !t.terminal).map(|t| t.next).collect();
    receivers.sort();
    receivers.dedup();
    for v in receivers {
        let rows: Vec<usize> = (0..batch.len())
            .filter(|&i| !batch[i].terminal && batch[i].next == v)
            .collect();
        let mut inputs = Vec::new();
        let mut states = Vec::with_capacity(rows.len());
        for &i in &rows {
            inputs.extend_from_slice(batch[i].s_next.as_slice());
            states.push(batch[i].h_next.clone());
        }
        let net = net_of(v);
        let cache = net.forward_batch(&inputs, &states)?;
        let width = net.spec().outputs;
        for (r, &i) in rows.iter().enumerate() {
            let tau = cache.q_values()[r * width..(r + 1) * width]
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            targets[i] += tau;
        }
    }
    Ok(targets)
}

/// One minibatch step for agent `n` on `sum (y - Q)^2 / batch`. Other agents
/// are only read, for their bootstrap estimates. Returns the loss, or `None`
/// when replay holds fewer than `batch_size` transitions.
pub fn train_step(agents: &mut [Agent], n: usize, batch_size: usize, rng: &mut SimRng) -> Result<Option<f64>, NetError> {
    let (inputs, states, actions, targets) = {
        let agent = &agents[n];
        let Some(batch) = agent.replay.sample(batch_size, rng) else {
            return Ok(None);
        };
        let targets = compute_targets(&batch, |v| &agents[v.0].net)?;
        let mut inputs = Vec::with_capacity(batch.len() * batch[0].s.width());
        let mut states = Vec::with_capacity(batch.len());
        let mut actions = Vec::with_capacity(batch.len());
        for t in &batch {
            inputs.extend_from_slice(t.s.as_slice());
            states.push(t.h.clone());
            actions.push(t.action);
        }
        (inputs, states, actions, targets)
    };
    let agent = &mut agents[n];
    let cache = agent.net.forward_batch(&inputs, &states)?;
    let (loss, dq) = td_loss(&cache, &actions, &targets, 1.0 / actions.len() as f64)?;
    let mut grads = vec![0.0; agent.net.param_count()];
    agent.net.backward(&cache, &dq, &mut grads)?;
    agent.opt.step(agent.net.params_mut(), &grads);
    Ok(Some(loss))
}
