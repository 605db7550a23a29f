//! Deterministic event-driven packet routing simulation.
//!
//! Every router holds one unbounded FIFO queue. The head-of-line packet is
//! routed by the policy, occupies a transmitter for the link time and is
//! handed to the chosen neighbor. Queueing time is measured from arrival
//! at the node to transmission start, so per-hop rewards `q + l` telescope
//! exactly to the delivery time.
//!
//! Two transmitter models are available. With [`Serialization::Node`] a
//! router sends at most one packet at a time over all of its links. With
//! [`Serialization::Link`] every outgoing link carries at most one packet
//! at a time; the head-of-line packet is routed as soon as it reaches the
//! head of the queue and waits there if its link is still busy.

pub mod events;
pub mod metrics;
pub mod traffic;

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::policy::{DecisionContext, HopFeedback, RoutingPolicy};
use crate::rng::SimRng;
use crate::topology::{NodeId, Topology};
use events::{Event, EventQueue};
pub use metrics::{Delivery, Metrics, WindowStat};
use traffic::{Millis, PacketSpec, TrafficSource};

pub const DEFAULT_LINK_TIME: Millis = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Packet {
    pub id: u64,
    pub src: NodeId,
    pub dst: NodeId,
    pub created_at: Millis,
    /// Arrival time at the node currently holding the packet.
    pub node_arrival_at: Millis,
    pub delivered_at: Option<Millis>,
    /// Nodes visited so far, starting with `src`.
    pub hops: Vec<NodeId>,
    /// Accumulated hop rewards `q + l`.
    pub reward_sum: Millis,
    last_queueing: Millis,
}

impl Packet {
    pub fn new(id: u64, src: NodeId, dst: NodeId, created_at: Millis) -> Self {
        Self {
            id,
            src,
            dst,
            created_at,
            node_arrival_at: created_at,
            delivered_at: None,
            hops: vec![src],
            reward_sum: 0.0,
            last_queueing: 0.0,
        }
    }
}

/// Reward of one hop: queueing time plus transmission time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopReward {
    pub queueing: Millis,
    pub transmission: Millis,
}

impl HopReward {
    pub fn total(&self) -> Millis {
        self.queueing + self.transmission
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Serialization {
    Node,
    Link,
}

impl FromStr for Serialization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "node" => Ok(Serialization::Node),
            "link" => Ok(Serialization::Link),
            other => Err(format!("unknown serialization `{other}` (node|link)")),
        }
    }
}

impl fmt::Display for Serialization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Serialization::Node => "node",
            Serialization::Link => "link",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub link_time: Millis,
    pub serialization: Serialization,
    /// Staleness period of neighbor queue advertisements; 0 means live.
    pub comm_interval: Millis,
    /// Number of recent next hops kept per node.
    pub history_len: usize,
    /// Number of queued destinations exposed behind the current packet.
    pub lookahead: usize,
    pub record_trace: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            link_time: DEFAULT_LINK_TIME,
            serialization: Serialization::Node,
            comm_interval: 0.0,
            history_len: 5,
            lookahead: 5,
            record_trace: false,
        }
    }
}

/// Per-node queue lengths and per-destination queued packet counts, as
/// advertised to neighbors.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueBoard {
    n: usize,
    lengths: Vec<usize>,
    dst_counts: Vec<u32>,
    taken_at: Millis,
}

impl QueueBoard {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            lengths: vec![0; n],
            dst_counts: vec![0; n * n],
            taken_at: 0.0,
        }
    }

    pub fn queue_len(&self, node: NodeId) -> usize {
        self.lengths[node.0]
    }

    /// Number of packets queued at `node` destined for `dst`.
    pub fn dst_count(&self, node: NodeId, dst: NodeId) -> u32 {
        self.dst_counts[node.0 * self.n + dst.0]
    }

    /// Time at which this advertisement was taken.
    pub fn taken_at(&self) -> Millis {
        self.taken_at
    }

    pub fn set(&mut self, node: NodeId, dst_counts: &[u32]) {
        assert_eq!(dst_counts.len(), self.n);
        self.dst_counts[node.0 * self.n..(node.0 + 1) * self.n].copy_from_slice(dst_counts);
        self.lengths[node.0] = dst_counts.iter().map(|&c| c as usize).sum();
    }

    fn add(&mut self, node: NodeId, dst: NodeId) {
        self.lengths[node.0] += 1;
        self.dst_counts[node.0 * self.n + dst.0] += 1;
    }

    fn remove(&mut self, node: NodeId, dst: NodeId) {
        self.lengths[node.0] -= 1;
        self.dst_counts[node.0 * self.n + dst.0] -= 1;
    }
}

/// Last advertisement time for a decision at `t` under staleness `interval`.
pub fn advertisement_time(t: Millis, interval: Millis) -> Millis {
    if interval <= 0.0 {
        t
    } else {
        (t / interval).floor() * interval
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    Create,
    TxStart,
    Arrive,
    Deliver,
}

impl TraceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::Create => "create",
            TraceKind::TxStart => "tx_start",
            TraceKind::Arrive => "arrive",
            TraceKind::Deliver => "deliver",
        }
    }
}

/// One row of the optional event trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub time_ms: Millis,
    pub event: TraceKind,
    pub packet_id: u64,
    pub node: NodeId,
    pub next_node: Option<NodeId>,
    pub q_ms: Option<Millis>,
}

/// Writes trace rows as CSV: `time_ms,event,packet_id,node,next_node,q_ms`.
pub fn write_trace_csv<W: std::io::Write>(records: &[TraceRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time_ms", "event", "packet_id", "node", "next_node", "q_ms"])?;
    for r in records {
        w.write_record([
            r.time_ms.to_string(),
            r.event.as_str().to_string(),
            r.packet_id.to_string(),
            r.node.to_string(),
            r.next_node.map(|n| n.to_string()).unwrap_or_default(),
            r.q_ms.map(|q| q.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
struct NodeRuntime {
    queue: VecDeque<usize>,
    /// Next hops of the last routed packets, newest first.
    history: Vec<NodeId>,
    /// Node-mode transmitter.
    busy: bool,
    /// Link-mode transmitters, indexed by action index.
    link_busy: Vec<bool>,
    /// Link mode: next hop already chosen for the head-of-line packet.
    committed: Option<NodeId>,
}

/// Counts of packets by location, for conservation checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Census {
    pub created: u64,
    pub delivered: u64,
    pub queued: u64,
    pub in_flight: u64,
}

pub struct Simulation<'t> {
    topo: &'t Topology,
    cfg: SimConfig,
    now: Millis,
    events: EventQueue,
    packets: Vec<Packet>,
    nodes: Vec<NodeRuntime>,
    live: QueueBoard,
    stale: QueueBoard,
    traffic: Option<Box<dyn TrafficSource + 't>>,
    metrics: Metrics,
    trace: Vec<TraceRecord>,
    in_flight: u64,
    upcoming_buf: Vec<NodeId>,
}

impl<'t> Simulation<'t> {
    pub fn new(topo: &'t Topology, cfg: SimConfig) -> Result<Self, SimError> {
        if !(cfg.link_time > 0.0) {
            return Err(SimError::Setup("link_time must be positive".into()));
        }
        if !(cfg.comm_interval >= 0.0) {
            return Err(SimError::Setup("comm_interval must be non-negative".into()));
        }
        let n = topo.n_nodes();
        let nodes = topo
            .nodes()
            .map(|u| NodeRuntime {
                queue: VecDeque::new(),
                history: Vec::with_capacity(cfg.history_len + 1),
                busy: false,
                link_busy: vec![false; topo.degree(u)],
                committed: None,
            })
            .collect();
        let mut events = EventQueue::default();
        if cfg.comm_interval > 0.0 {
            events.push(0.0, Event::Refresh);
        }
        Ok(Self {
            topo,
            cfg,
            now: 0.0,
            events,
            packets: Vec::new(),
            nodes,
            live: QueueBoard::empty(n),
            stale: QueueBoard::empty(n),
            traffic: None,
            metrics: Metrics::default(),
            trace: Vec::new(),
            in_flight: 0,
            upcoming_buf: Vec::new(),
        })
    }

    /// Attaches a packet source; its first packet is scheduled immediately.
    pub fn with_traffic(mut self, traffic: impl TrafficSource + 't) -> Self {
        self.traffic = Some(Box::new(traffic));
        self.schedule_next_creation();
        self
    }

    /// Schedules a single packet creation outside the traffic source.
    pub fn inject(&mut self, src: NodeId, dst: NodeId, at: Millis) -> Result<(), SimError> {
        let n = self.topo.n_nodes();
        if src == dst || src.0 >= n || dst.0 >= n {
            return Err(SimError::Setup(format!("invalid packet endpoints {src} -> {dst}")));
        }
        if at < self.now {
            return Err(SimError::Setup("cannot inject into the past".into()));
        }
        self.events
            .push(at, Event::Create(PacketSpec { created_at: at, src, dst }, false));
        Ok(())
    }

    pub fn now(&self) -> Millis {
        self.now
    }

    pub fn topology(&self) -> &Topology {
        self.topo
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    pub fn into_metrics(self) -> Metrics {
        self.metrics
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn packets(&self) -> &[Packet] {
        &self.packets
    }

    pub fn queue_len(&self, node: NodeId) -> usize {
        self.nodes[node.0].queue.len()
    }

    pub fn census(&self) -> Census {
        Census {
            created: self.metrics.created,
            delivered: self.metrics.deliveries.len() as u64,
            queued: self.nodes.iter().map(|n| n.queue.len() as u64).sum(),
            in_flight: self.in_flight,
        }
    }

    /// The advertisement a decision made now would see.
    pub fn advertised(&self) -> &QueueBoard {
        if self.cfg.comm_interval > 0.0 {
            &self.stale
        } else {
            &self.live
        }
    }

    /// Processes every event strictly before `until`; the clock then reads
    /// `until` (or stays put if `until` is infinite).
    pub fn run<P: RoutingPolicy + ?Sized>(
        &mut self,
        policy: &mut P,
        rng: &mut SimRng,
        until: Millis,
    ) -> Result<(), SimError> {
        while let Some(t) = self.events.peek_time() {
            if t >= until {
                break;
            }
            let (t, event) = self.events.pop().expect("peeked");
            self.now = t;
            match event {
                Event::Create(spec, from_traffic) => {
                    self.create(spec, policy, rng)?;
                    if from_traffic {
                        self.schedule_next_creation();
                    }
                }
                Event::TxComplete { from, to, packet } => self.complete(from, to, packet, policy, rng)?,
                Event::Refresh => {
                    self.stale = self.live.clone();
                    self.stale.taken_at = t;
                    let k = (t / self.cfg.comm_interval).round() + 1.0;
                    self.events.push(k * self.cfg.comm_interval, Event::Refresh);
                }
            }
        }
        if until.is_finite() {
            self.now = self.now.max(until);
        }
        Ok(())
    }

    fn schedule_next_creation(&mut self) {
        if let Some(spec) = self.traffic.as_mut().and_then(|t| t.next_spec()) {
            self.events.push(spec.created_at, Event::Create(spec, true));
        }
    }

    fn record(&mut self, event: TraceKind, packet: usize, node: NodeId, next: Option<NodeId>, q: Option<Millis>) {
        if self.cfg.record_trace {
            self.trace.push(TraceRecord {
                time_ms: self.now,
                event,
                packet_id: self.packets[packet].id,
                node,
                next_node: next,
                q_ms: q,
            });
        }
    }

    fn create<P: RoutingPolicy + ?Sized>(
        &mut self,
        spec: PacketSpec,
        policy: &mut P,
        rng: &mut SimRng,
    ) -> Result<(), SimError> {
        let idx = self.packets.len();
        self.packets
            .push(Packet::new(idx as u64, spec.src, spec.dst, self.now));
        self.metrics.created += 1;
        self.record(TraceKind::Create, idx, spec.src, None, None);
        self.enqueue(spec.src, idx);
        self.service(spec.src, policy, rng)
    }

    fn enqueue(&mut self, node: NodeId, packet: usize) {
        self.packets[packet].node_arrival_at = self.now;
        self.nodes[node.0].queue.push_back(packet);
        self.live.add(node, self.packets[packet].dst);
    }

    fn complete<P: RoutingPolicy + ?Sized>(
        &mut self,
        from: NodeId,
        to: NodeId,
        packet: usize,
        policy: &mut P,
        rng: &mut SimRng,
    ) -> Result<(), SimError> {
        self.in_flight -= 1;
        match self.cfg.serialization {
            Serialization::Node => self.nodes[from.0].busy = false,
            Serialization::Link => {
                let li = self.topo.action_index(from, to).expect("in-flight link exists");
                self.nodes[from.0].link_busy[li] = false;
            }
        }
        self.arrive(from, to, packet, policy, rng)?;
        self.service(from, policy, rng)
    }

    fn arrive<P: RoutingPolicy + ?Sized>(
        &mut self,
        sender: NodeId,
        receiver: NodeId,
        idx: usize,
        policy: &mut P,
        rng: &mut SimRng,
    ) -> Result<(), SimError> {
        let reward = HopReward {
            queueing: self.packets[idx].last_queueing,
            transmission: self.cfg.link_time,
        };
        {
            let p = &mut self.packets[idx];
            p.hops.push(receiver);
            p.reward_sum += reward.total();
        }
        let terminal = receiver == self.packets[idx].dst;
        if terminal {
            let now = self.now;
            let p = &mut self.packets[idx];
            p.delivered_at = Some(now);
            self.metrics.deliveries.push(Delivery {
                packet_id: p.id,
                src: p.src,
                dst: p.dst,
                created_at: p.created_at,
                delivered_at: now,
                hops: (p.hops.len() - 1) as u32,
                reward_sum: p.reward_sum,
            });
            self.record(TraceKind::Deliver, idx, receiver, None, None);
            let hop = HopFeedback {
                sender,
                receiver,
                packet: &self.packets[idx],
                reward,
                terminal: true,
                receiver_view: None,
            };
            policy.on_hop(&hop, rng);
            return Ok(());
        }

        self.record(TraceKind::Arrive, idx, receiver, None, None);
        if policy.is_learning() {
            self.fill_upcoming(receiver, 0);
            let board = if self.cfg.comm_interval > 0.0 { &self.stale } else { &self.live };
            let view = DecisionContext {
                now: self.now,
                node: receiver,
                packet: &self.packets[idx],
                topology: self.topo,
                upcoming: &self.upcoming_buf,
                history: &self.nodes[receiver.0].history,
                board,
            };
            let hop = HopFeedback {
                sender,
                receiver,
                packet: &self.packets[idx],
                reward,
                terminal: false,
                receiver_view: Some(view),
            };
            policy.on_hop(&hop, rng);
        }
        self.enqueue(receiver, idx);
        self.service(receiver, policy, rng)
    }

    fn fill_upcoming(&mut self, node: NodeId, skip: usize) {
        self.upcoming_buf.clear();
        let queue = &self.nodes[node.0].queue;
        self.upcoming_buf.extend(
            queue
                .iter()
                .skip(skip)
                .take(self.cfg.lookahead)
                .map(|&i| self.packets[i].dst),
        );
    }

    fn decide<P: RoutingPolicy + ?Sized>(
        &mut self,
        node: NodeId,
        packet: usize,
        skip: usize,
        policy: &mut P,
        rng: &mut SimRng,
    ) -> Result<NodeId, SimError> {
        self.fill_upcoming(node, skip);
        let board = if self.cfg.comm_interval > 0.0 { &self.stale } else { &self.live };
        let ctx = DecisionContext {
            now: self.now,
            node,
            packet: &self.packets[packet],
            topology: self.topo,
            upcoming: &self.upcoming_buf,
            history: &self.nodes[node.0].history,
            board,
        };
        let next = policy.decide(&ctx, rng)?;
        if !self.topo.has_edge(node, next) {
            return Err(SimError::InvalidAction { node, chosen: next });
        }
        let history = &mut self.nodes[node.0].history;
        if self.cfg.history_len > 0 {
            history.insert(0, next);
            history.truncate(self.cfg.history_len);
        }
        Ok(next)
    }

    fn start_transmission(&mut self, node: NodeId, packet: usize, next: NodeId) {
        let q = self.now - self.packets[packet].node_arrival_at;
        self.packets[packet].last_queueing = q;
        self.in_flight += 1;
        self.record(TraceKind::TxStart, packet, node, Some(next), Some(q));
        self.events.push(
            self.now + self.cfg.link_time,
            Event::TxComplete {
                from: node,
                to: next,
                packet,
            },
        );
    }

    fn service<P: RoutingPolicy + ?Sized>(
        &mut self,
        node: NodeId,
        policy: &mut P,
        rng: &mut SimRng,
    ) -> Result<(), SimError> {
        match self.cfg.serialization {
            Serialization::Node => {
                let rt = &mut self.nodes[node.0];
                if rt.busy {
                    return Ok(());
                }
                let Some(packet) = rt.queue.pop_front() else {
                    return Ok(());
                };
                self.live.remove(node, self.packets[packet].dst);
                let next = self.decide(node, packet, 0, policy, rng)?;
                self.nodes[node.0].busy = true;
                self.start_transmission(node, packet, next);
            }
            Serialization::Link => loop {
                let Some(&packet) = self.nodes[node.0].queue.front() else {
                    return Ok(());
                };
                let next = match self.nodes[node.0].committed {
                    Some(v) => v,
                    None => {
                        let v = self.decide(node, packet, 1, policy, rng)?;
                        self.nodes[node.0].committed = Some(v);
                        v
                    }
                };
                let li = self.topo.action_index(node, next).expect("validated neighbor");
                let rt = &mut self.nodes[node.0];
                if rt.link_busy[li] {
                    return Ok(());
                }
                rt.queue.pop_front();
                rt.committed = None;
                rt.link_busy[li] = true;
                self.live.remove(node, self.packets[packet].dst);
                self.start_transmission(node, packet, next);
            },
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::ShortestPath;
    use crate::rng::{substream, Substream};
    use crate::topology::builtin_grid3x3;

    fn rng() -> SimRng {
        substream(0, Substream::Exploration)
    }

    fn single(src: usize, dst: usize, serialization: Serialization) -> Metrics {
        let g = builtin_grid3x3();
        let cfg = SimConfig {
            serialization,
            ..SimConfig::default()
        };
        let mut sim = Simulation::new(&g, cfg).unwrap();
        sim.inject(NodeId(src), NodeId(dst), 0.0).unwrap();
        let mut policy = ShortestPath::new(&g);
        sim.run(&mut policy, &mut rng(), f64::INFINITY).unwrap();
        sim.into_metrics()
    }

    #[test]
    fn one_uncontended_hop() {
        for s in [Serialization::Node, Serialization::Link] {
            let m = single(0, 1, s);
            assert_eq!(m.deliveries[0].delivery_time(), 1.0);
        }
    }

    #[test]
    fn corner_to_corner_takes_four_hops() {
        for s in [Serialization::Node, Serialization::Link] {
            let m = single(0, 8, s);
            assert_eq!(m.deliveries[0].delivery_time(), 4.0);
            assert_eq!(m.deliveries[0].hops, 4);
        }
    }

    #[test]
    fn fifo_serializes_the_transmitter() {
        for s in [Serialization::Node, Serialization::Link] {
            let g = builtin_grid3x3();
            let cfg = SimConfig {
                serialization: s,
                record_trace: true,
                ..SimConfig::default()
            };
            let mut sim = Simulation::new(&g, cfg).unwrap();
            sim.inject(NodeId(0), NodeId(1), 0.0).unwrap();
            sim.inject(NodeId(0), NodeId(1), 0.0).unwrap();
            sim.run(&mut ShortestPath::new(&g), &mut rng(), f64::INFINITY).unwrap();
            let d = &sim.metrics().deliveries;
            assert_eq!(d.len(), 2);
            assert_eq!(d[0].delivery_time(), 1.0);
            assert_eq!(d[1].delivery_time(), 2.0);
            let qs: Vec<_> = sim
                .trace()
                .iter()
                .filter(|r| r.event == TraceKind::TxStart)
                .map(|r| r.q_ms.unwrap())
                .collect();
            assert_eq!(qs, vec![0.0, 1.0]);
        }
    }

    #[test]
    fn node_mode_blocks_other_links_link_mode_does_not() {
        // 0 -> 1 and 0 -> 3 at the same instant
        let run = |s| {
            let g = builtin_grid3x3();
            let cfg = SimConfig {
                serialization: s,
                ..SimConfig::default()
            };
            let mut sim = Simulation::new(&g, cfg).unwrap();
            sim.inject(NodeId(0), NodeId(1), 0.0).unwrap();
            sim.inject(NodeId(0), NodeId(3), 0.0).unwrap();
            sim.run(&mut ShortestPath::new(&g), &mut rng(), f64::INFINITY).unwrap();
            sim.into_metrics().sum_delivery_time()
        };
        assert_eq!(run(Serialization::Node), 3.0);
        assert_eq!(run(Serialization::Link), 2.0);
    }

    #[test]
    fn advertisement_floors_to_last_refresh() {
        assert_eq!(advertisement_time(7.3, 5.0), 5.0);
        assert_eq!(advertisement_time(4.9, 5.0), 0.0);
        assert_eq!(advertisement_time(4.9, 0.0), 4.9);
    }

    #[test]
    fn stale_board_only_changes_at_refresh_times() {
        let g = builtin_grid3x3();
        let cfg = SimConfig {
            comm_interval: 5.0,
            ..SimConfig::default()
        };
        let mut sim = Simulation::new(&g, cfg).unwrap();
        for i in 0..6 {
            sim.inject(NodeId(0), NodeId(8), 1.0 + i as f64 * 0.1).unwrap();
        }
        let mut policy = ShortestPath::new(&g);
        sim.run(&mut policy, &mut rng(), 4.9).unwrap();
        assert_eq!(sim.advertised().queue_len(NodeId(0)), 0);
        assert_eq!(sim.advertised().taken_at(), 0.0);
        assert!(sim.queue_len(NodeId(0)) > 0);
        sim.run(&mut policy, &mut rng(), 7.3).unwrap();
        assert_eq!(sim.advertised().taken_at(), 5.0);
    }

    #[test]
    fn rejects_bad_setup() {
        let g = builtin_grid3x3();
        let mut sim = Simulation::new(&g, SimConfig::default()).unwrap();
        assert!(sim.inject(NodeId(3), NodeId(3), 0.0).is_err());
        assert!(sim.inject(NodeId(3), NodeId(30), 0.0).is_err());
        let cfg = SimConfig {
            link_time: 0.0,
            ..SimConfig::default()
        };
        assert!(Simulation::new(&g, cfg).is_err());
    }

    struct Rogue;

    impl RoutingPolicy for Rogue {
        fn name(&self) -> &str {
            "rogue"
        }
        fn decide(&mut self, _ctx: &DecisionContext<'_>, _rng: &mut SimRng) -> Result<NodeId, SimError> {
            Ok(NodeId(8))
        }
    }

    #[test]
    fn non_neighbor_action_aborts() {
        let g = builtin_grid3x3();
        let mut sim = Simulation::new(&g, SimConfig::default()).unwrap();
        sim.inject(NodeId(0), NodeId(4), 0.0).unwrap();
        let err = sim.run(&mut Rogue, &mut rng(), f64::INFINITY).unwrap_err();
        assert!(matches!(err, SimError::InvalidAction { node: NodeId(0), chosen: NodeId(8) }));
    }
}
