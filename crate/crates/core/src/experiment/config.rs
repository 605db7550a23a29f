//! Scenario files: flat `key = value` lines, `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dqrc::{AgentHyperParams, ArchConfig, DqrcConfig, DqrcVariant, EncoderConfig, PretrainConfig};
use crate::error::ConfigError;
use crate::nn::OptimizerKind;
use crate::policy::QRoutingParams;
use crate::sim::traffic::{LoadSchedule, Millis, TrafficConfig};
use crate::sim::{Serialization, SimConfig};
use crate::topology::{NodeId, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    ShortestPath,
    Backpressure,
    QRouting,
    Dqrc(DqrcVariant),
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::ShortestPath => "shortest_path",
            PolicyKind::Backpressure => "backpressure",
            PolicyKind::QRouting => "q_routing",
            PolicyKind::Dqrc(DqrcVariant::Full) => "dqrc",
            PolicyKind::Dqrc(DqrcVariant::NoComm) => "dqrc_nocomm",
            PolicyKind::Dqrc(DqrcVariant::NoLstm) => "dqrc_nolstm",
            PolicyKind::Dqrc(DqrcVariant::Dqr) => "dqr",
        }
    }

    pub fn is_learning(self) -> bool {
        matches!(self, PolicyKind::QRouting | PolicyKind::Dqrc(_))
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "shortest_path" | "sp" => PolicyKind::ShortestPath,
            "backpressure" | "bp" => PolicyKind::Backpressure,
            "q_routing" | "qrouting" => PolicyKind::QRouting,
            "dqrc" => PolicyKind::Dqrc(DqrcVariant::Full),
            "dqrc_nocomm" | "dqrc_no_comm" => PolicyKind::Dqrc(DqrcVariant::NoComm),
            "dqrc_nolstm" | "dqrc_no_lstm" => PolicyKind::Dqrc(DqrcVariant::NoLstm),
            "dqr" => PolicyKind::Dqrc(DqrcVariant::Dqr),
            other => {
                return Err(format!(
                    "unknown policy `{other}` (shortest_path|backpressure|q_routing|dqrc|dqrc_nocomm|dqrc_nolstm|dqr)"
                ))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    OfflineTrain,
    OfflineTest,
    Online,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "offline_train" => Ok(Mode::OfflineTrain),
            "offline_test" => Ok(Mode::OfflineTest),
            "online" => Ok(Mode::Online),
            other => Err(format!("unknown mode `{other}` (offline_train|offline_test|online)")),
        }
    }
}

/// Linear decay from `start` to `end` over the first `decay_episodes`
/// training episodes, then constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_episodes: usize,
}

impl EpsilonSchedule {
    pub fn at(&self, episode: usize) -> f64 {
        if episode >= self.decay_episodes {
            return self.end;
        }
        let frac = episode as f64 / self.decay_episodes as f64;
        self.start + (self.end - self.start) * frac
    }
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self {
            start: 1.0,
            end: 0.05,
            decay_episodes: 200,
        }
    }
}

/// Everything one experiment needs. Every randomized quantity derives from
/// `seed` (training) or the individual test seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    /// Builtin name or edge-list path.
    pub topology: String,
    pub policy: PolicyKind,
    pub mode: Mode,

    pub generated_interval: Millis,
    pub distribution_ratio: f64,
    /// Busy pair; `None` picks the topology's default.
    pub busy_src: Option<usize>,
    pub busy_dst: Option<usize>,

    pub serialization: Serialization,
    pub link_time: Millis,
    pub comm_interval: Millis,

    pub history_len: usize,
    pub lookahead: usize,
    pub arch: ArchConfig,
    pub hyper: AgentHyperParams,
    pub q_learning_rate: f64,
    pub epsilon: EpsilonSchedule,
    /// Exploration while learning online.
    pub online_epsilon: f64,

    pub episode_ms: Millis,
    pub episodes: usize,
    pub train_packets: usize,
    pub smoothing_window: usize,
    pub test_ms: Millis,
    pub seed: u64,
    pub test_seeds: Vec<u64>,

    pub online_ms: Millis,
    pub window_ms: Millis,
    /// `(time, generated_interval)` load changes.
    pub schedule: Vec<(Millis, Millis)>,

    pub checkpoint: Option<PathBuf>,
    /// Supervised shortest-path initialization before reinforcement learning.
    pub pretrain: Option<PretrainConfig>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "scenario".into(),
            topology: "grid3x3".into(),
            policy: PolicyKind::Dqrc(DqrcVariant::Full),
            mode: Mode::OfflineTest,
            generated_interval: 0.5,
            distribution_ratio: 0.7,
            busy_src: None,
            busy_dst: None,
            serialization: Serialization::Link,
            link_time: 1.0,
            comm_interval: 0.0,
            history_len: 5,
            lookahead: 5,
            arch: ArchConfig::default(),
            hyper: AgentHyperParams::default(),
            q_learning_rate: QRoutingParams::default().learning_rate,
            epsilon: EpsilonSchedule::default(),
            online_epsilon: 0.0,
            episode_ms: 100.0,
            episodes: 1000,
            train_packets: 1000,
            smoothing_window: 50,
            test_ms: 100.0,
            seed: 0,
            test_seeds: (0..50).collect(),
            online_ms: 12_000.0,
            window_ms: 100.0,
            schedule: Vec::new(),
            checkpoint: None,
            pretrain: None,
        }
    }
}

/// Default busy ingress/egress pair for a topology.
pub fn default_busy_pair(topo: &Topology) -> (usize, usize) {
    match topo.name() {
        "att25" => (17, 8),
        _ => (0, topo.n_nodes().saturating_sub(1)),
    }
}

impl ScenarioConfig {
    pub fn traffic(&self, topo: &Topology) -> TrafficConfig {
        let (src, dst) = default_busy_pair(topo);
        TrafficConfig {
            generated_interval: self.generated_interval,
            distribution_ratio: self.distribution_ratio,
            busy_src: NodeId(self.busy_src.unwrap_or(src)),
            busy_dst: NodeId(self.busy_dst.unwrap_or(dst)),
        }
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            link_time: self.link_time,
            serialization: self.serialization,
            comm_interval: self.comm_interval,
            history_len: self.history_len,
            lookahead: self.lookahead,
            record_trace: false,
        }
    }

    /// Agent configuration, or `None` for non-DQRC policies.
    pub fn dqrc_config(&self, n_nodes: usize) -> Option<DqrcConfig> {
        let PolicyKind::Dqrc(variant) = self.policy else {
            return None;
        };
        Some(DqrcConfig {
            encoder: EncoderConfig {
                k: self.history_len,
                m: self.lookahead,
                n_nodes,
            },
            variant,
            arch: self.arch,
            hyper: self.hyper,
        })
    }

    pub fn q_params(&self) -> QRoutingParams {
        QRoutingParams {
            learning_rate: self.q_learning_rate,
            epsilon: 0.0,
        }
    }

    pub fn load_schedule(&self) -> Result<LoadSchedule, ConfigError> {
        LoadSchedule::with_changes(self.generated_interval, &self.schedule)
            .map_err(|e| ConfigError::Value {
                key: "schedule".into(),
                message: e.to_string(),
            })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::Value {
                    key: key.into(),
                    message: format!("must be positive, got {v}"),
                })
            }
        };
        positive("generated_interval", self.generated_interval)?;
        positive("link_time", self.link_time)?;
        positive("episode_ms", self.episode_ms)?;
        positive("test_ms", self.test_ms)?;
        positive("online_ms", self.online_ms)?;
        positive("window_ms", self.window_ms)?;
        if !(0.0..=1.0).contains(&self.distribution_ratio) {
            return Err(ConfigError::Value {
                key: "distribution_ratio".into(),
                message: "must be in [0, 1]".into(),
            });
        }
        if !(self.comm_interval >= 0.0 && self.comm_interval.is_finite()) {
            return Err(ConfigError::Value {
                key: "comm_interval".into(),
                message: "must be non-negative".into(),
            });
        }
        for (key, eps) in [
            ("epsilon_start", self.epsilon.start),
            ("epsilon_end", self.epsilon.end),
            ("online_epsilon", self.online_epsilon),
        ] {
            if !(0.0..=1.0).contains(&eps) {
                return Err(ConfigError::Value {
                    key: key.into(),
                    message: "must be in [0, 1]".into(),
                });
            }
        }
        if self.episodes == 0 || self.train_packets == 0 {
            return Err(ConfigError::Invalid("episodes and train_packets must be positive".into()));
        }
        if self.test_seeds.is_empty() {
            return Err(ConfigError::Invalid("test_seeds must not be empty".into()));
        }
        if self.hyper.batch_size == 0 || self.hyper.replay_capacity < self.hyper.batch_size {
            return Err(ConfigError::Invalid("replay_capacity must be at least batch_size > 0".into()));
        }
        if self.arch.subset_width == 0 || self.arch.hidden_width == 0 {
            return Err(ConfigError::Invalid("layer widths must be positive".into()));
        }
        self.load_schedule()?;
        Ok(())
    }

    /// Parses a scenario file over the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Parse {
                    line: line_no,
                    message: format!("expected `key = value`, got `{line}`"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if let Some(first) = seen.insert(key.to_string(), line_no) {
                return Err(ConfigError::Parse {
                    line: line_no,
                    message: format!("duplicate key `{key}` (first set on line {first})"),
                });
            }
            cfg.set(key, value).map_err(|e| match e {
                ConfigError::Value { key, message } => ConfigError::Parse {
                    line: line_no,
                    message: format!("{key}: {message}"),
                },
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
        where
            T::Err: fmt::Display,
        {
            value.parse::<T>().map_err(|e| ConfigError::Value {
                key: key.into(),
                message: format!("`{value}`: {e}"),
            })
        }
        let bad = |message: String| ConfigError::Value {
            key: key.into(),
            message,
        };
        match key {
            "name" => self.name = value.to_string(),
            "topology" => self.topology = value.to_string(),
            "policy" => self.policy = parse(key, value)?,
            "variant" => self.policy = PolicyKind::Dqrc(parse(key, value)?),
            "mode" => self.mode = parse(key, value)?,
            "generated_interval" => self.generated_interval = parse(key, value)?,
            "distribution_ratio" => self.distribution_ratio = parse_ratio(value).map_err(bad)?,
            "busy_src" => self.busy_src = Some(parse(key, value)?),
            "busy_dst" => self.busy_dst = Some(parse(key, value)?),
            "serialization" => self.serialization = parse(key, value)?,
            "link_time" => self.link_time = parse(key, value)?,
            "comm_interval" => self.comm_interval = parse(key, value)?,
            "history_len" | "k" => self.history_len = parse(key, value)?,
            "lookahead" | "m" => self.lookahead = parse(key, value)?,
            "subset_width" => self.arch.subset_width = parse(key, value)?,
            "hidden_layers" => self.arch.hidden_layers = parse(key, value)?,
            "hidden_width" => self.arch.hidden_width = parse(key, value)?,
            "learning_rate" => self.hyper.learning_rate = parse(key, value)?,
            "optimizer" => {
                self.hyper.optimizer = parse::<OptimizerKind>(key, value)?;
            }
            "train_period" => self.hyper.train_period = parse(key, value)?,
            "replay_capacity" => self.hyper.replay_capacity = parse(key, value)?,
            "batch_size" => self.hyper.batch_size = parse(key, value)?,
            "q_learning_rate" => self.q_learning_rate = parse(key, value)?,
            "epsilon_start" => self.epsilon.start = parse(key, value)?,
            "epsilon_end" => self.epsilon.end = parse(key, value)?,
            "epsilon_decay_episodes" => self.epsilon.decay_episodes = parse(key, value)?,
            "online_epsilon" => self.online_epsilon = parse(key, value)?,
            "episode_ms" => self.episode_ms = parse(key, value)?,
            "episodes" => self.episodes = parse(key, value)?,
            "train_packets" => self.train_packets = parse(key, value)?,
            "smoothing_window" => self.smoothing_window = parse(key, value)?,
            "test_ms" => self.test_ms = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "test_seeds" | "seeds" => self.test_seeds = parse_seeds(value).map_err(bad)?,
            "online_ms" => self.online_ms = parse(key, value)?,
            "window_ms" => self.window_ms = parse(key, value)?,
            "schedule" => self.schedule = parse_schedule(value).map_err(bad)?,
            "checkpoint" => self.checkpoint = (!value.is_empty()).then(|| PathBuf::from(value)),
            "pretrain" => {
                let on: bool = parse(key, value)?;
                self.pretrain = on.then(|| self.pretrain.unwrap_or_default());
            }
            "pretrain_episodes" => self.pretrain_mut().episodes = parse(key, value)?,
            "pretrain_optimizer" => {
                let kind: OptimizerKind = parse(key, value)?;
                let p = self.pretrain_mut();
                p.optimizer = kind;
                p.learning_rate = kind.default_learning_rate();
            }
            "pretrain_learning_rate" => self.pretrain_mut().learning_rate = parse(key, value)?,
            _ => {
                return Err(ConfigError::Value {
                    key: key.into(),
                    message: "unknown key".into(),
                })
            }
        }
        Ok(())
    }

    fn pretrain_mut(&mut self) -> &mut PretrainConfig {
        self.pretrain.get_or_insert_with(PretrainConfig::default)
    }
}

/// `0.7` or `70%`.
fn parse_ratio(value: &str) -> Result<f64, String> {
    let (num, scale) = match value.strip_suffix('%') {
        Some(v) => (v.trim(), 0.01),
        None => (value, 1.0),
    };
    num.parse::<f64>()
        .map(|v| v * scale)
        .map_err(|e| format!("`{value}`: {e}"))
}

/// `0..50` (half-open range) or a comma-separated list.
pub fn parse_seeds(value: &str) -> Result<Vec<u64>, String> {
    if let Some((a, b)) = value.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|e| format!("`{value}`: {e}"))?;
        let b: u64 = b.trim().parse().map_err(|e| format!("`{value}`: {e}"))?;
        if b <= a {
            return Err(format!("empty seed range `{value}`"));
        }
        return Ok((a..b).collect());
    }
    value
        .split(',')
        .map(|s| s.trim().parse::<u64>().map_err(|e| format!("`{s}`: {e}")))
        .collect()
}

/// `4000:0.7, 8000:1.0`; empty for no changes.
pub fn parse_schedule(value: &str) -> Result<Vec<(Millis, Millis)>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (t, iv) = item
                .split_once(':')
                .ok_or_else(|| format!("expected `time:interval`, got `{item}`"))?;
            let t: f64 = t.trim().parse().map_err(|e| format!("`{item}`: {e}"))?;
            let iv: f64 = iv.trim().parse().map_err(|e| format!("`{item}`: {e}"))?;
            Ok((t, iv))
        })
        .collect()
}
