use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::agent::{network_spec, select_action, train_step, Agent, AgentHyperParams, ArchConfig};
use super::encode::{encode_state, DqrcVariant, EncodedState, EncoderConfig};
use super::replay::Transition;
use crate::error::{Error, SimError};
use crate::nn::{HiddenState, QNetwork};
use crate::policy::{DecisionContext, HopFeedback, RoutingPolicy};
use crate::rng::{indexed_substream, substream, SimRng, Substream};
use crate::topology::{NodeId, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DqrcConfig {
    pub encoder: EncoderConfig,
    pub variant: DqrcVariant,
    pub arch: ArchConfig,
    pub hyper: AgentHyperParams,
}

impl DqrcConfig {
    pub fn new(n_nodes: usize) -> Self {
        Self {
            encoder: EncoderConfig::new(n_nodes),
            variant: DqrcVariant::Full,
            arch: ArchConfig::default(),
            hyper: AgentHyperParams::default(),
        }
    }

    pub fn policy_name(&self) -> &'static str {
        match self.variant {
            DqrcVariant::Full => "dqrc",
            DqrcVariant::NoComm => "dqrc_nocomm",
            DqrcVariant::NoLstm => "dqrc_nolstm",
            DqrcVariant::Dqr => "dqr",
        }
    }
}

/// Terminal flag as computed for one hop, kept for auditing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlagRecord {
    pub packet_id: u64,
    pub sender: NodeId,
    pub receiver: NodeId,
    pub dst: NodeId,
    pub terminal: bool,
}

#[derive(Debug, Clone)]
struct Pending {
    s: EncodedState,
    h: HiddenState,
    action: usize,
}

/// One DQRC agent per router behind the routing-policy interface.
#[derive(Debug, Clone)]
pub struct Dqrc {
    topo: Topology,
    cfg: DqrcConfig,
    agents: Vec<Agent>,
    /// Decisions awaiting their hop outcome, by packet id.
    pending: HashMap<u64, Pending>,
    epsilon: f64,
    learning: bool,
    replay_rng: SimRng,
    flag_log: Option<Vec<FlagRecord>>,
    train_steps: u64,
    loss_sum: f64,
}

impl Dqrc {
    /// Fresh agents with independently seeded initial weights.
    pub fn new(topo: &Topology, cfg: DqrcConfig, seed: u64) -> Result<Self, Error> {
        let nets = topo
            .nodes()
            .map(|u| {
                let spec = network_spec(&cfg.encoder, cfg.variant, &cfg.arch, topo.degree(u));
                QNetwork::new(spec, &mut indexed_substream(seed, Substream::Init, u.0 as u64))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_networks(topo, cfg, nets, seed)
    }

    pub fn from_networks(topo: &Topology, cfg: DqrcConfig, nets: Vec<QNetwork>, seed: u64) -> Result<Self, Error> {
        if cfg.encoder.n_nodes != topo.n_nodes() || nets.len() != topo.n_nodes() {
            return Err(Error::Checkpoint(format!(
                "{} networks / encoder for {} nodes on a {}-node topology",
                nets.len(),
                cfg.encoder.n_nodes,
                topo.n_nodes()
            )));
        }
        let mut agents = Vec::with_capacity(nets.len());
        for (u, net) in topo.nodes().zip(nets) {
            let expected = network_spec(&cfg.encoder, cfg.variant, &cfg.arch, topo.degree(u));
            if net.spec() != &expected {
                return Err(Error::Checkpoint(format!("network for node {u} does not match the configuration")));
            }
            agents.push(Agent::new(u, topo, net, &cfg.hyper)?);
        }
        Ok(Self {
            topo: topo.clone(),
            epsilon: cfg.hyper.epsilon,
            cfg,
            agents,
            pending: HashMap::new(),
            learning: true,
            replay_rng: substream(seed, Substream::Replay),
            flag_log: None,
            train_steps: 0,
            loss_sum: 0.0,
        })
    }

    pub fn config(&self) -> &DqrcConfig {
        &self.cfg
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn agents_mut(&mut self) -> &mut [Agent] {
        &mut self.agents
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn learning(&self) -> bool {
        self.learning
    }

    /// Starts recording the terminal flag of every hop.
    pub fn enable_flag_audit(&mut self) {
        self.flag_log = Some(Vec::new());
    }

    pub fn flag_log(&self) -> &[FlagRecord] {
        self.flag_log.as_deref().unwrap_or(&[])
    }

    pub fn train_steps(&self) -> u64 {
        self.train_steps
    }

    /// Mean minibatch loss over all training steps so far.
    pub fn mean_loss(&self) -> Option<f64> {
        (self.train_steps > 0).then(|| self.loss_sum / self.train_steps as f64)
    }

    fn transition_for(&self, hop: &HopFeedback<'_>, pending: Pending) -> Transition {
        let width = pending.s.width();
        let (s_next, h_next) = match &hop.receiver_view {
            Some(view) if !hop.terminal => (
                encode_state(view, &self.cfg.encoder, self.cfg.variant),
                self.agents[hop.receiver.0].state.clone(),
            ),
            _ => (EncodedState::zeros(width), HiddenState::zeros(pending.h.width())),
        };
        Transition {
            s: pending.s,
            h: pending.h,
            action: pending.action,
            reward: hop.reward.total(),
            next: hop.receiver,
            s_next,
            h_next,
            terminal: hop.terminal,
        }
    }
}

impl RoutingPolicy for Dqrc {
    fn name(&self) -> &str {
        self.cfg.policy_name()
    }

    fn decide(&mut self, ctx: &DecisionContext<'_>, rng: &mut SimRng) -> Result<NodeId, SimError> {
        let s = encode_state(ctx, &self.cfg.encoder, self.cfg.variant);
        let agent = &self.agents[ctx.node.0];
        let choice = select_action(agent, &s, &agent.state, self.epsilon, rng)
            .map_err(|e| SimError::Policy(e.to_string()))?;
        let h = std::mem::replace(&mut self.agents[ctx.node.0].state, choice.h_next);
        if self.learning {
            self.pending.insert(
                ctx.packet.id,
                Pending {
                    s,
                    h,
                    action: choice.index,
                },
            );
        }
        Ok(choice.next)
    }

    fn on_hop(&mut self, hop: &HopFeedback<'_>, _rng: &mut SimRng) {
        if let Some(log) = &mut self.flag_log {
            log.push(FlagRecord {
                packet_id: hop.packet.id,
                sender: hop.sender,
                receiver: hop.receiver,
                dst: hop.packet.dst,
                terminal: hop.terminal,
            });
        }
        if !self.learning {
            return;
        }
        let Some(pending) = self.pending.remove(&hop.packet.id) else {
            return;
        };
        let t = self.transition_for(hop, pending);
        let n = hop.sender.0;
        if self.agents[n].store(t, self.cfg.hyper.train_period) {
            let loss = train_step(&mut self.agents, n, self.cfg.hyper.batch_size, &mut self.replay_rng)
                .expect("agent networks have consistent shapes");
            if let Some(loss) = loss {
                self.train_steps += 1;
                self.loss_sum += loss;
            }
        }
    }

    fn is_learning(&self) -> bool {
        self.learning
    }

    fn set_epsilon(&mut self, epsilon: f64) {
        self.epsilon = epsilon;
    }

    fn set_learning(&mut self, enabled: bool) {
        self.learning = enabled;
        if !enabled {
            self.pending.clear();
        }
    }

    fn reset_episode(&mut self) {
        self.pending.clear();
        for a in &mut self.agents {
            a.reset_state();
        }
    }
}
