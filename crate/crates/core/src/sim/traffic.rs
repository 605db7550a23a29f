//! Packet generation: a deterministic arrival process with randomized
//! endpoints, optionally following a piecewise-constant load schedule.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::rng::SimRng;
use crate::topology::NodeId;

pub type Millis = f64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficConfig {
    /// Time between consecutive packet creations.
    pub generated_interval: Millis,
    /// Fraction of packets sent on the busy pair.
    pub distribution_ratio: f64,
    pub busy_src: NodeId,
    pub busy_dst: NodeId,
}

impl TrafficConfig {
    pub fn validate(&self, n_nodes: usize) -> Result<(), SimError> {
        if !(self.generated_interval > 0.0 && self.generated_interval.is_finite()) {
            return Err(SimError::Setup("generated_interval must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.distribution_ratio) {
            return Err(SimError::Setup("distribution_ratio must be in [0, 1]".into()));
        }
        if self.busy_src == self.busy_dst {
            return Err(SimError::Setup("busy_src and busy_dst must differ".into()));
        }
        if self.busy_src.0 >= n_nodes || self.busy_dst.0 >= n_nodes {
            return Err(SimError::Setup("busy pair outside the topology".into()));
        }
        if n_nodes < 2 {
            return Err(SimError::Setup("traffic needs at least two nodes".into()));
        }
        Ok(())
    }
}

/// A packet to be injected: creation time and endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketSpec {
    pub created_at: Millis,
    pub src: NodeId,
    pub dst: NodeId,
}

/// Draws the endpoints of one packet created at `t`.
pub fn next_packet(cfg: &TrafficConfig, n_nodes: usize, rng: &mut SimRng, t: Millis) -> PacketSpec {
    let busy = rng.random::<f64>() < cfg.distribution_ratio;
    let (src, dst) = if busy {
        (cfg.busy_src, cfg.busy_dst)
    } else {
        let src = rng.random_range(0..n_nodes);
        let mut dst = rng.random_range(0..n_nodes - 1);
        if dst >= src {
            dst += 1;
        }
        (NodeId(src), NodeId(dst))
    };
    PacketSpec { created_at: t, src, dst }
}

/// Piecewise-constant generated interval: `(start time, interval)` segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadSchedule {
    segments: Vec<(Millis, Millis)>,
}

impl LoadSchedule {
    pub fn constant(interval: Millis) -> Self {
        Self {
            segments: vec![(0.0, interval)],
        }
    }

    /// `changes` are `(time, new interval)` pairs with strictly increasing,
    /// positive times.
    pub fn with_changes(initial: Millis, changes: &[(Millis, Millis)]) -> Result<Self, SimError> {
        let mut segments = vec![(0.0, initial)];
        for &(t, interval) in changes {
            let last = segments.last().map(|s| s.0).unwrap_or(0.0);
            if !(t > last) {
                return Err(SimError::Setup("schedule times must be strictly increasing".into()));
            }
            if !(interval > 0.0) {
                return Err(SimError::Setup("scheduled interval must be positive".into()));
            }
            segments.push((t, interval));
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[(Millis, Millis)] {
        &self.segments
    }

    pub fn last_change(&self) -> Millis {
        self.segments.last().map(|s| s.0).unwrap_or(0.0)
    }
}

/// Source of packet creations in nondecreasing time order.
pub trait TrafficSource {
    fn next_spec(&mut self) -> Option<PacketSpec>;
}

/// A pre-built packet series, replayed as-is.
#[derive(Debug, Clone)]
pub struct PacketSeries {
    specs: Vec<PacketSpec>,
    cursor: usize,
}

impl PacketSeries {
    pub fn new(specs: Vec<PacketSpec>) -> Self {
        Self { specs, cursor: 0 }
    }

    /// Generates `count` packets at the fixed interval of `cfg`.
    pub fn generate(cfg: &TrafficConfig, n_nodes: usize, count: usize, rng: &mut SimRng) -> Self {
        let specs = (0..count)
            .map(|i| next_packet(cfg, n_nodes, rng, i as f64 * cfg.generated_interval))
            .collect();
        Self::new(specs)
    }

    pub fn specs(&self) -> &[PacketSpec] {
        &self.specs
    }

    /// A fresh cursor over the same packets.
    pub fn replay(&self) -> Self {
        Self::new(self.specs.clone())
    }
}

impl TrafficSource for PacketSeries {
    fn next_spec(&mut self) -> Option<PacketSpec> {
        let spec = self.specs.get(self.cursor).copied();
        self.cursor += 1;
        spec
    }
}

/// Endless generator following a [`LoadSchedule`]. Within a segment that
/// starts at `s` with interval `g`, packets are created at `s + j * g`.
#[derive(Debug, Clone)]
pub struct GeneratedTraffic {
    cfg: TrafficConfig,
    n_nodes: usize,
    schedule: LoadSchedule,
    rng: SimRng,
    segment: usize,
    step: u64,
}

impl GeneratedTraffic {
    pub fn new(cfg: TrafficConfig, n_nodes: usize, schedule: LoadSchedule, rng: SimRng) -> Self {
        Self {
            cfg,
            n_nodes,
            schedule,
            rng,
            segment: 0,
            step: 0,
        }
    }

    pub fn constant(cfg: TrafficConfig, n_nodes: usize, rng: SimRng) -> Self {
        let schedule = LoadSchedule::constant(cfg.generated_interval);
        Self::new(cfg, n_nodes, schedule, rng)
    }
}

impl TrafficSource for GeneratedTraffic {
    fn next_spec(&mut self) -> Option<PacketSpec> {
        let segments = self.schedule.segments();
        loop {
            let (start, interval) = segments[self.segment];
            let t = start + self.step as f64 * interval;
            match segments.get(self.segment + 1) {
                Some(&(next_start, _)) if t >= next_start => {
                    self.segment += 1;
                    self.step = 0;
                }
                _ => {
                    self.step += 1;
                    return Some(next_packet(&self.cfg, self.n_nodes, &mut self.rng, t));
                }
            }
        }
    }
}
